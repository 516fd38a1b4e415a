#include "psc/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace psc {

namespace linalg {

bool cholesky(const Mat& a, int n, Mat& lower) {
    lower.fill(0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * kMaxVars + j];
            for (int k = 0; k < j; ++k) s -= lower[i * kMaxVars + k] * lower[j * kMaxVars + k];
            if (i == j) {
                if (s <= 0.0) return false;
                lower[i * kMaxVars + i] = std::sqrt(s);
            } else {
                lower[i * kMaxVars + j] = s / lower[j * kMaxVars + j];
            }
        }
    }
    return true;
}

bool invert(const Mat& a, int n, Mat& out, double& det) {
    // Gauss-Jordan with partial pivoting
    double w[kMaxVars][2 * kMaxVars];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w[i][j] = a[i * kMaxVars + j];
        for (int j = 0; j < n; ++j) w[i][n + j] = i == j ? 1.0 : 0.0;
    }
    det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(w[r][c]) > std::fabs(w[piv][c])) piv = r;
        if (w[piv][c] == 0.0) { det = 0.0; return false; }
        if (piv != c) {
            for (int j = 0; j < 2 * n; ++j) std::swap(w[piv][j], w[c][j]);
            det = -det;
        }
        det *= w[c][c];
        double inv = 1.0 / w[c][c];
        for (int j = 0; j < 2 * n; ++j) w[c][j] *= inv;
        for (int r = 0; r < n; ++r) {
            if (r == c || w[r][c] == 0.0) continue;
            double f = w[r][c];
            for (int j = 0; j < 2 * n; ++j) w[r][j] -= f * w[c][j];
        }
    }
    out.fill(0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i * kMaxVars + j] = w[i][n + j];
    return true;
}

void invert_spd(const Mat& a, int n, Mat& out, double& det) {
    if (!invert(a, n, out, det) || det <= 0.0)
        throw GeometryError("matrix inversion failed");
}

void sym_eigenvalues(const Mat& a, int n, Vec& evals) {
    Mat m = a;
    auto at = [&](int i, int j) -> double& { return m[i * kMaxVars + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(at(p, q)) < 1e-300) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    double api = at(p, i), aqi = at(q, i);
                    at(p, i) = c * api - s * aqi;
                    at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    for (int i = 0; i < n; ++i) evals[i] = at(i, i);
    std::sort(evals.begin(), evals.begin() + n);
}

void sym_sqrt(const Mat& a, int n, Mat& out) {
    // Jacobi with accumulated rotations
    Mat m = a;
    Mat v{};
    for (int i = 0; i < n; ++i) v[i * kMaxVars + i] = 1.0;
    auto at = [&](Mat& w, int i, int j) -> double& { return w[i * kMaxVars + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(m, i, j) * at(m, i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(at(m, p, q)) < 1e-300) continue;
                double theta = (at(m, q, q) - at(m, p, p)) / (2.0 * at(m, p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = at(m, i, p), aiq = at(m, i, q);
                    at(m, i, p) = c * aip - s * aiq;
                    at(m, i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    double api = at(m, p, i), aqi = at(m, q, i);
                    at(m, p, i) = c * api - s * aqi;
                    at(m, q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = at(v, i, p), viq = at(v, i, q);
                    at(v, i, p) = c * vip - s * viq;
                    at(v, i, q) = s * vip + c * viq;
                }
            }
        }
    }
    out.fill(0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < n; ++l) {
                double lam = m[l * kMaxVars + l];
                if (lam < 0.0) throw GeometryError("sym_sqrt of an indefinite matrix");
                s += v[i * kMaxVars + l] * std::sqrt(lam) * v[j * kMaxVars + l];
            }
            out[i * kMaxVars + j] = s;
        }
}

} // namespace linalg

PointMetric metric_at(const MetricSpec& spec, const std::vector<double>& x) {
    int d = spec.dim();
    if (static_cast<int>(x.size()) != d)
        throw GeometryError("metric_at: point dimension mismatch");
    PointMetric pm;
    pm.d = d;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            Jet2 jj = eval_jet2(spec.at(i, j), x, spec.coords);
            pm.g[i * kMaxVars + j] = jj.v;
            pm.g[j * kMaxVars + i] = jj.v;
            for (int k = 0; k < d; ++k) {
                pm.dg[k][i * kMaxVars + j] = jj.g[k];
                pm.dg[k][j * kMaxVars + i] = jj.g[k];
                for (int l = 0; l < d; ++l) {
                    pm.d2g[k][l][i * kMaxVars + j] = jj.hess(k, l);
                    pm.d2g[k][l][j * kMaxVars + i] = jj.hess(k, l);
                }
            }
        }
    }
    linalg::Mat lower;
    if (!linalg::cholesky(pm.g, d, lower)) {
        linalg::Vec ev;
        linalg::sym_eigenvalues(pm.g, d, ev);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "metric is not positive definite (smallest eigenvalue %.6g)", ev[0]);
        throw GeometryError(buf);
    }
    linalg::invert_spd(pm.g, d, pm.ginv, pm.det);
    pm.sqrt_det = std::sqrt(pm.det);
    return pm;
}

Christoffel christoffel(const PointMetric& pm) {
    int d = pm.d;
    Christoffel ch;
    ch.d = d;
    auto G = [&](int k, int i, int j) -> double& { return ch.G[k][i * kMaxVars + j]; };
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int l = 0; l < d; ++l)
                    s += pm.ginv[k * kMaxVars + l] *
                         (pm.dg[i][j * kMaxVars + l] + pm.dg[j][i * kMaxVars + l] -
                          pm.dg[l][i * kMaxVars + j]);
                G(k, i, j) = 0.5 * s;
            }
    // d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
    std::array<linalg::Mat, kMaxVars> dginv;
    for (int m = 0; m < d; ++m) {
        dginv[m].fill(0.0);
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                double s = 0.0;
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        s += pm.ginv[k * kMaxVars + a] * pm.dg[m][a * kMaxVars + b] *
                             pm.ginv[b * kMaxVars + l];
                dginv[m][k * kMaxVars + l] = -s;
            }
    }
    for (int m = 0; m < d; ++m)
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < d; ++l) {
                        s += dginv[m][k * kMaxVars + l] *
                             (pm.dg[i][j * kMaxVars + l] + pm.dg[j][i * kMaxVars + l] -
                              pm.dg[l][i * kMaxVars + j]);
                        s += pm.ginv[k * kMaxVars + l] *
                             (pm.d2g[m][i][j * kMaxVars + l] + pm.d2g[m][j][i * kMaxVars + l] -
                              pm.d2g[m][l][i * kMaxVars + j]);
                    }
                    ch.dG[m][k][i * kMaxVars + j] = 0.5 * s;
                }
    return ch;
}

CurvatureData curvature_at(const MetricSpec& spec, const std::vector<double>& x) {
    PointMetric pm = metric_at(spec, x);
    Christoffel ch = christoffel(pm);
    int d = pm.d;
    CurvatureData out;
    out.d = d;
    out.riemann.assign(static_cast<size_t>(d) * d * d * d, 0.0);
    auto G = [&](int k, int i, int j) { return ch.G[k][i * kMaxVars + j]; };
    auto dG = [&](int m, int k, int i, int j) { return ch.dG[m][k][i * kMaxVars + j]; };
    // R^a_{s m n} = d_m Gamma^a_{n s} - d_n Gamma^a_{m s}
    //            + Gamma^a_{m l} Gamma^l_{n s} - Gamma^a_{n l} Gamma^l_{m s}
    for (int a = 0; a < d; ++a)
        for (int s = 0; s < d; ++s)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    double r = dG(m, a, n, s) - dG(n, a, m, s);
                    for (int l = 0; l < d; ++l)
                        r += G(a, m, l) * G(l, n, s) - G(a, n, l) * G(l, m, s);
                    out.riemann[((a * d + s) * d + m) * d + n] = r;
                }
    for (int s = 0; s < d; ++s)
        for (int n = 0; n < d; ++n) {
            double r = 0.0;
            for (int m = 0; m < d; ++m) r += out.riem(m, s, m, n);
            out.ricci[s * kMaxVars + n] = r;
        }
    out.scalar = 0.0;
    for (int s = 0; s < d; ++s)
        for (int n = 0; n < d; ++n)
            out.scalar += pm.ginv[s * kMaxVars + n] * out.ricci[s * kMaxVars + n];
    return out;
}

double brioschi_K(const MetricSpec& spec, const std::vector<double>& x) {
    if (spec.dim() != 2) throw GeometryError("brioschi_K needs a 2d metric");
    Jet2 E = eval_jet2(spec.at(0, 0), x, spec.coords);
    Jet2 F = eval_jet2(spec.at(0, 1), x, spec.coords);
    Jet2 G = eval_jet2(spec.at(1, 1), x, spec.coords);
    double det3a[3][3] = {
        {-0.5 * E.hess(1, 1) + F.hess(0, 1) - 0.5 * G.hess(0, 0), 0.5 * E.g[0],
         F.g[0] - 0.5 * E.g[1]},
        {F.g[1] - 0.5 * G.g[0], E.v, F.v},
        {0.5 * G.g[1], F.v, G.v}};
    double det3b[3][3] = {
        {0.0, 0.5 * E.g[1], 0.5 * G.g[0]},
        {0.5 * E.g[1], E.v, F.v},
        {0.5 * G.g[0], F.v, G.v}};
    auto det3 = [](double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    double denom = E.v * G.v - F.v * F.v;
    if (denom <= 0.0) throw GeometryError("brioschi_K: metric is not positive definite");
    return (det3(det3a) - det3(det3b)) / (denom * denom);
}

ScalarField scalar_curvature_field(const MetricSpec& spec, const ChartGrid& grid) {
    ScalarField out(grid.total);
    std::vector<int> idx;
    std::vector<double> x;
    for (int64_t f = 0; f < grid.total; ++f) {
        grid.unravel(f, idx);
        grid.point(idx, x);
        out[f] = curvature_at(spec, x).scalar;
    }
    return out;
}

ScalarField laplace_beltrami(const MetricSpec& spec, const ChartGrid& grid,
                             const ScalarField& u, int order) {
    if (static_cast<int64_t>(u.size()) != grid.total)
        throw GeometryError("laplace_beltrami: field size mismatch");
    int d = spec.dim();
    ScalarField out(grid.total);
    std::vector<int> idx;
    std::vector<double> x;
    for (int64_t f = 0; f < grid.total; ++f) {
        grid.unravel(f, idx);
        grid.point(idx, x);
        PointMetric pm = metric_at(spec, x);
        Christoffel ch = christoffel(pm);
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                double gij = pm.ginv[i * kMaxVars + j];
                if (gij == 0.0) continue;
                acc += gij * diff2_mixed(grid, u, idx, i, j, order);
            }
        }
        for (int k = 0; k < d; ++k) {
            double coef = 0.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    coef += pm.ginv[i * kMaxVars + j] * ch.G[k][i * kMaxVars + j];
            if (coef != 0.0) acc -= coef * diff1(grid, u, idx, k, order);
        }
        out[f] = acc;
    }
    return out;
}

ScalarField covariant_hessian_VV(const MetricSpec& spec, const ChartGrid& grid,
                                 const ScalarField& u, const std::vector<double>& V,
                                 int order) {
    int d = spec.dim();
    if (static_cast<int64_t>(V.size()) != grid.total * d)
        throw GeometryError("covariant_hessian_VV: vector field size mismatch");
    ScalarField out(grid.total);
    std::vector<int> idx;
    std::vector<double> x;
    for (int64_t f = 0; f < grid.total; ++f) {
        grid.unravel(f, idx);
        grid.point(idx, x);
        PointMetric pm = metric_at(spec, x);
        Christoffel ch = christoffel(pm);
        const double* v = &V[f * d];
        double acc = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (v[i] == 0.0 || v[j] == 0.0) continue;
                acc += v[i] * v[j] * diff2_mixed(grid, u, idx, i, j, order);
            }
        for (int k = 0; k < d; ++k) {
            double coef = 0.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    coef += v[i] * v[j] * ch.G[k][i * kMaxVars + j];
            if (coef != 0.0) acc -= coef * diff1(grid, u, idx, k, order);
        }
        out[f] = acc;
    }
    return out;
}

double integrate(const MetricSpec& spec, const ChartGrid& grid, const ScalarField& f) {
    double acc = 0.0;
    std::vector<int> idx;
    std::vector<double> x;
    for (int64_t i = 0; i < grid.total; ++i) {
        grid.unravel(i, idx);
        grid.point(idx, x);
        PointMetric pm = metric_at(spec, x);
        acc += f[i] * pm.sqrt_det * grid.cell_weight(idx);
    }
    return acc;
}

double lp_norm(const MetricSpec& spec, const ChartGrid& grid, const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw GeometryError("lp_norm: need p >= 1");
    double acc = 0.0;
    std::vector<int> idx;
    std::vector<double> x;
    for (int64_t i = 0; i < grid.total; ++i) {
        grid.unravel(i, idx);
        grid.point(idx, x);
        PointMetric pm = metric_at(spec, x);
        acc += std::pow(std::fabs(f[i]), p) * pm.sqrt_det * grid.cell_weight(idx);
    }
    return std::pow(acc, 1.0 / p);
}

double volume(const MetricSpec& spec, const ChartGrid& grid) {
    ScalarField one(grid.total, 1.0);
    return integrate(spec, grid, one);
}

std::string curvature_csv(const MetricSpec& spec, const ChartGrid& grid) {
    std::ostringstream os;
    for (const auto& c : spec.coords) os << c << ",";
    os << "scalar_curvature";
    if (spec.dim() == 2) os << ",gauss_K";
    os << "\n";
    std::vector<int> idx;
    std::vector<double> x;
    char buf[32];
    for (int64_t f = 0; f < grid.total; ++f) {
        grid.unravel(f, idx);
        grid.point(idx, x);
        for (double xi : x) {
            std::snprintf(buf, sizeof buf, "%.17g", xi);
            os << buf << ",";
        }
        CurvatureData c = curvature_at(spec, x);
        std::snprintf(buf, sizeof buf, "%.17g", c.scalar);
        os << buf;
        if (spec.dim() == 2) {
            std::snprintf(buf, sizeof buf, "%.17g", brioschi_K(spec, x));
            os << "," << buf;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace psc

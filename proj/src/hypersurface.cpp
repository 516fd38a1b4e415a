#include "psc/hypersurface.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace psc {

namespace {

constexpr int S = kMaxVars;

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// dginv[i](a,b) = -(ginv dg[i] ginv)(a,b)
void d_inverse(const PointMetric& pm, int i, linalg::Mat& out) {
    const int d = pm.d;
    linalg::Mat tmp{};
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += pm.ginv[a * S + c] * pm.dg[i][c * S + b];
            tmp[a * S + b] = s;
        }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += tmp[a * S + c] * pm.ginv[c * S + b];
            out[a * S + b] = -s;
        }
}

} // namespace

MetricSpec induced_metric(const MetricSpec& spec, int coord, double value) {
    const int d = spec.dim();
    if (coord < 0 || coord >= d) throw GeometryError("slice coordinate out of range");
    for (int i = 0; i < d; ++i) {
        if (spec.topology[i].kind == TopKind::PolarTheta &&
            (spec.topology[i].azimuth == coord || i == coord))
            throw GeometryError("cannot slice a sphere-polar chart pair");
    }
    MetricSpec out;
    out.x_dim = coord < spec.x_dim ? spec.x_dim - 1 : spec.x_dim;
    out.k = coord < spec.x_dim ? spec.k : spec.k - 1;
    for (int i = 0; i < d; ++i) {
        if (i == coord) continue;
        out.coords.push_back(spec.coords[i]);
        Topology top = spec.topology[i];
        if (top.kind == TopKind::PolarTheta && top.azimuth > coord) top.azimuth -= 1;
        out.topology.push_back(top);
    }
    out.comp.assign(d - 1, std::vector<ExprPtr>(d - 1));
    for (int i = 0; i < d; ++i) {
        if (i == coord) continue;
        for (int j = 0; j < d; ++j) {
            if (j == coord) continue;
            int ii = i < coord ? i : i - 1;
            int jj = j < coord ? j : j - 1;
            ExprPtr e = spec.comp[i][j];
            if (e) e = substitute_var(e, coord, value);
            out.comp[ii][jj] = e ? shift_vars_above(e, coord) : nullptr;
        }
    }
    return out;
}

NormalData unit_normal(const MetricSpec& spec, int coord, const std::vector<double>& x) {
    PointMetric pm = metric_at(spec, x);
    const int d = pm.d;
    const double gff = pm.ginv[coord * S + coord];
    if (!(gff > 0.0)) throw GeometryError("degenerate conormal on slice coordinate");
    const double q = 1.0 / std::sqrt(gff);

    NormalData nd;
    nd.nu.resize(d);
    for (int j = 0; j < d; ++j) nd.nu[j] = pm.ginv[j * S + coord] * q;

    nd.dnu.assign(d, std::vector<double>(d, 0.0));
    linalg::Mat dginv{};
    for (int i = 0; i < d; ++i) {
        d_inverse(pm, i, dginv);
        const double dq = -0.5 * q * q * q * dginv[coord * S + coord];
        for (int j = 0; j < d; ++j)
            nd.dnu[i][j] = dginv[j * S + coord] * q + pm.ginv[j * S + coord] * dq;
    }

    double check = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) check += pm.g[a * S + b] * nd.nu[a] * nd.nu[b];
    nd.unit_check = check;
    return nd;
}

ExtrinsicData second_fundamental_form(const MetricSpec& spec, int coord,
                                      const std::vector<double>& x) {
    PointMetric pm = metric_at(spec, x);
    Christoffel ch = christoffel(pm);
    NormalData nd = unit_normal(spec, coord, x);
    const int d = pm.d;
    const int m = d - 1;

    ExtrinsicData ex;
    ex.nu = nd.nu;

    auto tang = [coord](int i) { return i < coord ? i : i + 1; };

    for (int ti = 0; ti < m; ++ti) {
        const int i = tang(ti);
        for (int tj = 0; tj < m; ++tj) {
            const int j = tang(tj);
            double a = 0.0;
            for (int kk = 0; kk < d; ++kk) {
                double cov = nd.dnu[i][kk];
                for (int l = 0; l < d; ++l) cov += ch.G[kk][i * S + l] * nd.nu[l];
                a += pm.g[kk * S + j] * cov;
            }
            ex.A[ti * S + tj] = a;
        }
    }

    linalg::Mat ghat{};
    for (int ti = 0; ti < m; ++ti)
        for (int tj = 0; tj < m; ++tj) ghat[ti * S + tj] = pm.g[tang(ti) * S + tang(tj)];
    linalg::Mat ghat_inv{};
    double det = 0.0;
    if (!linalg::invert(ghat, m, ghat_inv, det))
        throw GeometryError("induced metric on the slice is singular");

    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) ex.h += ghat_inv[a * S + b] * ex.A[a * S + b];
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int e = 0; e < m; ++e)
                    ex.normA2 += ghat_inv[a * S + c] * ghat_inv[b * S + e] *
                                 ex.A[a * S + b] * ex.A[c * S + e];

    CurvatureData cd = curvature_at(spec, x);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) ex.ric_nn += cd.ricci[a * S + b] * nd.nu[a] * nd.nu[b];
    return ex;
}

SliceTower slice_tower(const MetricSpec& ambient, const std::vector<double>& x_point) {
    if (static_cast<int>(x_point.size()) != ambient.x_dim)
        throw GeometryError("slice tower expects a base point on the closed factor");
    SliceTower tw;
    tw.n = ambient.n();
    tw.k = ambient.k;
    tw.levels.resize(ambient.k + 1);
    tw.levels[ambient.k] = ambient;
    for (int j = ambient.k; j >= 1; --j)
        tw.levels[j - 1] = induced_metric(tw.levels[j], ambient.x_dim + j - 1, 0.0);

    for (int j = ambient.k; j >= 1; --j) {
        const MetricSpec& lvl = tw.levels[j];
        std::vector<double> pt(x_point);
        pt.resize(ambient.x_dim + j, 0.0);
        const int coord = ambient.x_dim + j - 1;
        ExtrinsicData ex = second_fundamental_form(lvl, coord, pt);

        ProjectedNormal pr;
        pr.a = ex.nu[ambient.x_dim];
        pr.V.assign(ex.nu.begin(), ex.nu.begin() + ambient.x_dim);
        double mx = std::abs(pr.a);
        for (double c : pr.V) mx = std::max(mx, std::abs(c));
        pr.degenerate = mx < 1e-12;

        tw.extrinsic.push_back(std::move(ex));
        tw.proj.push_back(std::move(pr));
    }

    // lengths of the projected normals in the X x R_1 metric
    std::vector<double> pt1(x_point);
    pt1.push_back(0.0);
    PointMetric g1 = metric_at(tw.levels[1], pt1);
    const int d1 = g1.d;
    for (auto& pr : tw.proj) {
        std::vector<double> mu(pr.V);
        mu.push_back(pr.a);
        double s = 0.0;
        for (int a = 0; a < d1; ++a)
            for (int b = 0; b < d1; ++b) s += g1.g[a * S + b] * mu[a] * mu[b];
        pr.norm2 = s;
    }
    return tw;
}

double gauss_codazzi_residual(const MetricSpec& ambient, const std::vector<double>& x_point) {
    SliceTower tw = slice_tower(ambient, x_point);
    std::vector<double> full(x_point);
    full.resize(ambient.dim(), 0.0);
    const double r_amb = curvature_at(ambient, full).scalar;
    const double r_x = curvature_at(tw.levels[0], x_point).scalar;
    double acc = r_amb;
    for (const auto& ex : tw.extrinsic) acc += -2.0 * ex.ric_nn + ex.h * ex.h - ex.normA2;
    return r_x - acc;
}

std::string slice_geometry_csv(const MetricSpec& ambient, const ChartGrid& x_grid) {
    std::string out;
    for (int a = 0; a < ambient.x_dim; ++a) {
        out += ambient.coords[a];
        out += ',';
    }
    for (int j = ambient.k; j >= 1; --j) {
        const std::string& c = ambient.coords[ambient.x_dim + j - 1];
        out += "h[" + c + "],normA2[" + c + "],ric_nn[" + c + "],proj_a[" + c + "],proj_norm2[" + c + "],";
    }
    out += "gauss_codazzi_residual\n";

    for (std::int64_t idx = 0; idx < x_grid.total; ++idx) {
        std::vector<double> x = x_grid.point(idx);
        SliceTower tw = slice_tower(ambient, x);
        std::vector<double> full(x);
        full.resize(ambient.dim(), 0.0);
        const double r_amb = curvature_at(ambient, full).scalar;
        const double r_x = curvature_at(tw.levels[0], x).scalar;
        double acc = r_amb;
        for (const auto& ex : tw.extrinsic) acc += -2.0 * ex.ric_nn + ex.h * ex.h - ex.normA2;

        for (double c : x) { out += fmt_g(c); out += ','; }
        for (std::size_t s = 0; s < tw.extrinsic.size(); ++s) {
            const auto& ex = tw.extrinsic[s];
            const auto& pr = tw.proj[s];
            out += fmt_g(ex.h); out += ',';
            out += fmt_g(ex.normA2); out += ',';
            out += fmt_g(ex.ric_nn); out += ',';
            out += fmt_g(pr.a); out += ',';
            out += fmt_g(pr.norm2); out += ',';
        }
        out += fmt_g(r_x - acc);
        out += '\n';
    }
    return out;
}

} // namespace psc

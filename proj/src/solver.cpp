#include "psc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psc {

namespace {

constexpr int S = kMaxVars;

double circle_dist(double t, double period) {
    double r = std::fmod(std::fabs(t), period);
    return std::min(r, period - r);
}

double smoothstep(double x) {
    // exp(-1/x) blend, 0 at x <= 0 and 1 at x >= 1
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

} // namespace

double bump_profile(double t, double eps, double period) {
    const double s = circle_dist(t, period);
    if (s >= eps) return 0.0;
    if (s <= 0.5 * eps) return 1.0;
    return smoothstep(2.0 - 2.0 * s / eps);
}

ScalarField build_bump_rhs(const ChartGrid& grid, const BumpSpec& bump) {
    const int t_axis = grid.ndim() - 1;
    if (grid.axes[t_axis].kind != TopKind::Periodic)
        throw SolverError("bump right side needs a trailing circle direction");
    ScalarField f(static_cast<std::size_t>(grid.total), 0.0);
    std::vector<int> idx;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        grid.unravel(i, idx);
        const double t = grid.coord(t_axis, idx[t_axis]);
        f[i] = bump.amplitude * bump_profile(t, bump.eps, bump.t_period);
    }
    return f;
}

EpsilonChoice choose_epsilon(const MetricSpec& w_spec, const ChartGrid& w_grid,
                             double amplitude, double delta, double p, double eps_max) {
    if (!(delta > 0.0) || !(p >= 1.0)) throw SolverError("delta > 0 and p >= 1 required");
    const int t_axis = w_grid.ndim() - 1;
    const double period = w_grid.axes[t_axis].h * w_grid.axes[t_axis].n;
    const double vol_w = volume(w_spec, w_grid);
    const double vol_x = vol_w / period;

    EpsilonChoice ch;
    ch.budget = std::pow(delta, p) / (std::pow(amplitude, p) * 2.0 * vol_x);

    auto mass = [&](double eps) {
        BumpSpec b{amplitude, eps, period, true};
        ScalarField f = build_bump_rhs(w_grid, b);
        return lp_norm(w_spec, w_grid, f, p);
    };

    if (mass(eps_max) < delta) {
        ch.eps = eps_max;
    } else {
        double lo = 0.0, hi = eps_max;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mass(mid) < delta)
                lo = mid;
            else
                hi = mid;
        }
        ch.eps = lo;
    }
    ch.resolvable = ch.eps >= 4.0 * w_grid.axes[t_axis].h;
    return ch;
}

PdeSolution solve_operator(const DiscreteOperator& op, const ScalarField& rhs,
                           double tol, int max_iter) {
    PdeSolution sol;
    sol.u.assign(rhs.size(), 0.0);
    sol.stats = solve_linear(op.A, rhs, sol.u, tol, max_iter);
    return sol;
}

double norm_c1alpha(const ChartGrid& grid, const ScalarField& u, double alpha,
                    std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw SolverError("alpha must lie in (0,1)");
    const int d = grid.ndim();

    double sup = 0.0;
    for (double v : u) sup = std::max(sup, std::fabs(v));

    // forward first differences per axis
    double fd = 0.0;
    std::vector<int> idx;
    for (int a = 0; a < d; ++a) {
        const GridAxis& ax = grid.axes[a];
        for (std::int64_t i = 0; i < grid.total; ++i) {
            grid.unravel(i, idx);
            if (ax.kind == TopKind::Line && idx[a] + 1 >= ax.n) continue;
            const std::int64_t q = grid.neighbor(idx, a, 1);
            fd = std::max(fd, std::fabs(u[q] - u[i]) / ax.h);
        }
    }

    // offsets within eight spacings per axis, lexicographically positive
    std::vector<std::vector<int>> offsets;
    std::vector<int> cur(d, -8);
    for (;;) {
        int first = 0;
        while (first < d && cur[first] == 0) ++first;
        if (first < d && cur[first] > 0) offsets.push_back(cur);
        int a = d - 1;
        for (; a >= 0; --a) {
            if (cur[a] < 8) {
                ++cur[a];
                break;
            }
            cur[a] = -8;
        }
        if (a < 0) break;
    }

    const std::int64_t K = static_cast<std::int64_t>(offsets.size());
    const std::int64_t total = grid.total * K;
    const std::int64_t cap = 1000000;
    const std::int64_t stride = total <= cap ? 1 : (total + cap - 1) / cap;
    const std::int64_t start = stride == 1 ? 0 : static_cast<std::int64_t>(seed % stride);

    double holder = 0.0;
    std::vector<int> iv;
    for (std::int64_t id = start; id < total; id += stride) {
        const std::int64_t node = id / K;
        const std::vector<int>& o = offsets[id % K];
        grid.unravel(node, iv);
        bool ok = true;
        double dist2 = 0.0;
        std::int64_t q = node;
        for (int a = 0; a < d && ok; ++a) {
            if (o[a] == 0) continue;
            const GridAxis& ax = grid.axes[a];
            if (ax.kind == TopKind::Line) {
                const int ni = iv[a] + o[a];
                if (ni < 0 || ni >= ax.n) {
                    ok = false;
                    break;
                }
            }
            q = grid.neighbor(q, a, o[a]);
            dist2 += (o[a] * ax.h) * (o[a] * ax.h);
        }
        if (!ok) continue;
        holder = std::max(holder, std::fabs(u[node] - u[q]) / std::pow(std::sqrt(dist2), alpha));
    }
    return sup + fd + holder;
}

double second_t_derivative_sup(const ChartGrid& grid, const ScalarField& u, double eps) {
    const int t_axis = grid.ndim() - 1;
    const GridAxis& ax = grid.axes[t_axis];
    if (ax.kind != TopKind::Periodic)
        throw SolverError("second t derivative needs a trailing circle direction");
    const double period = ax.h * ax.n;

    std::vector<int> in_window;
    for (int j = 0; j < ax.n; ++j)
        if (circle_dist(grid.coord(t_axis, j), period) < 0.25 * eps) in_window.push_back(j);
    if (static_cast<int>(in_window.size()) < 3)
        throw SolverError("fewer than three t layers inside |t| < eps/4");

    double sup = 0.0;
    std::vector<int> idx;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        grid.unravel(i, idx);
        if (circle_dist(grid.coord(t_axis, idx[t_axis]), period) >= 0.25 * eps) continue;
        sup = std::max(sup, std::fabs(diff2(grid, u, idx, t_axis, 2)));
    }
    return sup;
}

double yamabe_quotient(const MetricSpec& spec, const ChartGrid& grid, const ScalarField& v) {
    const int nd = spec.dim();
    if (nd < 3) throw SolverError("energy quotient needs dimension at least 3");
    double max_abs = 0.0;
    for (double x : v) max_abs = std::max(max_abs, std::fabs(x));
    if (max_abs == 0.0) throw SolverError("test function is identically zero");

    ScalarField grad2(static_cast<std::size_t>(grid.total), 0.0);
    ScalarField v2(static_cast<std::size_t>(grid.total), 0.0);
    ScalarField vp(static_cast<std::size_t>(grid.total), 0.0);
    ScalarField rv2(static_cast<std::size_t>(grid.total), 0.0);
    const double crit = 2.0 * nd / (nd - 2.0);

    std::vector<int> idx;
    std::vector<double> x;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        grid.unravel(i, idx);
        grid.point(idx, x);
        const PointMetric pm = metric_at(spec, x);
        double dv[kMaxVars];
        for (int a = 0; a < nd; ++a) dv[a] = diff1(grid, v, idx, a, 2);
        double g2 = 0.0;
        for (int a = 0; a < nd; ++a)
            for (int b = 0; b < nd; ++b) g2 += pm.ginv[a * S + b] * dv[a] * dv[b];
        grad2[i] = g2;
        v2[i] = v[i] * v[i];
        vp[i] = std::pow(std::fabs(v[i]), crit);
        rv2[i] = curvature_at(spec, x).scalar * v2[i];
    }

    const double num = 4.0 * (nd - 1.0) / (nd - 2.0) * integrate(spec, grid, grad2) +
                       integrate(spec, grid, rv2);
    const double den = integrate(spec, grid, vp);
    if (den <= 0.0) throw SolverError("energy quotient denominator vanished");
    return num / std::pow(den, (nd - 2.0) / nd);
}

SpectrumBound spectrum_lower_bound(const MetricSpec& spec, const ChartGrid& grid,
                                   double tol, int max_iter) {
    const int nd = spec.dim();
    if (nd < 3) throw SolverError("conformal Laplacian needs dimension at least 3");
    ScalarField rfield(static_cast<std::size_t>(grid.total), 0.0);
    std::vector<int> idx;
    std::vector<double> x;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        grid.unravel(i, idx);
        grid.point(idx, x);
        rfield[i] = curvature_at(spec, x).scalar;
    }
    const double c = 4.0 * (nd - 1.0) / (nd - 2.0);
    DiscreteOperator op = assemble_operator(spec, grid, {}, {}, -c, rfield, 2);

    // Gershgorin lower bound gives a safe shift below the spectrum
    double shift = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < op.A.n; ++i) {
        double diag = 0.0, off = 0.0;
        for (std::int64_t p = op.A.rowptr[i]; p < op.A.rowptr[i + 1]; ++p) {
            if (op.A.col[p] == i)
                diag = op.A.val[p];
            else
                off += std::fabs(op.A.val[p]);
        }
        shift = std::min(shift, diag - off);
    }
    shift -= 1.0;

    CsrMatrix shifted = op.A;
    for (std::int64_t i = 0; i < shifted.n; ++i)
        for (std::int64_t p = shifted.rowptr[i]; p < shifted.rowptr[i + 1]; ++p)
            if (shifted.col[p] == i) shifted.val[p] -= shift;

    const std::size_t n = static_cast<std::size_t>(op.A.n);
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n), av(n);

    SpectrumBound sb;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        SolveStats st = solve_linear(shifted, v, w, 1e-12, 2000);
        if (!st.converged) throw SolverError("inverse iteration solve failed");
        double nrm = 0.0;
        for (double y : w) nrm += y * y;
        nrm = std::sqrt(nrm);
        for (std::size_t q = 0; q < n; ++q) v[q] = w[q] / nrm;

        op.A.multiply(v, av);
        double rayleigh = 0.0;
        for (std::size_t q = 0; q < n; ++q) rayleigh += v[q] * av[q];
        sb.lambda_min = rayleigh;
        sb.iterations = it;
        if (std::fabs(rayleigh - prev) <= tol * std::max(1.0, std::fabs(rayleigh))) {
            sb.converged = true;
            break;
        }
        prev = rayleigh;
    }
    return sb;
}

} // namespace psc

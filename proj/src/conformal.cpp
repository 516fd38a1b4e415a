#include "psc/conformal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>

namespace psc {

MetricSpec restrict_to_x(const MetricSpec& ambient) {
    MetricSpec cur = ambient;
    for (int j = ambient.k; j > 0; --j) cur = induced_metric(cur, cur.dim() - 1, 0.0);
    return cur;
}

namespace {

constexpr int S = kMaxVars;

std::string fmt(const char* f, ...) {
    char buf[320];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return std::string(buf);
}

// Laplacian of a grid field at one node. `map` sends spec directions to
// grid axes; entries of -1 mark directions the field is constant along.
double laplacian_at(const PointMetric& pm, const Christoffel& ch, const ChartGrid& grid,
                    const ScalarField& u, const std::vector<int>& idx,
                    const std::vector<int>& map, int order) {
    const int d = pm.d;
    std::array<double, kMaxVars> d1{};
    for (int a = 0; a < d; ++a)
        if (map[a] >= 0) d1[a] = diff1(grid, u, idx, map[a], order);

    double acc = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const double gi = pm.at(pm.ginv, a, b);
            if (gi == 0.0) continue;
            if (map[a] >= 0 && map[b] >= 0) {
                const double d2 = (a == b) ? diff2(grid, u, idx, map[a], order)
                                           : diff2_mixed(grid, u, idx, map[a], map[b], order);
                acc += gi * d2;
            }
            for (int c = 0; c < d; ++c)
                if (map[c] >= 0) acc -= gi * ch.G[c][a * S + b] * d1[c];
        }
    return acc;
}

struct SliceScan {
    ScalarField rtilde;
    double rtilde_min = std::numeric_limits<double>::infinity();
    double rtilde_max = -std::numeric_limits<double>::infinity();
    double quotient_max = 0.0;
    double a1_max = 0.0;
    double dev_max = 0.0;
    double direct_max = 0.0;
    bool has_crosscheck = false;
    bool finite = true;
};

// Everything measured on the t = 0 slice in one pass over the X grid: the
// transformed scalar curvature both directly and through the substituted
// right side, the first order quotient, and the Laplacian comparison gap.
SliceScan scan_slice(const MetricSpec& ambient, const MetricSpec& x_spec,
                     const MetricSpec& w_spec, const ChartGrid& x_grid,
                     const ChartGrid& w_grid, const ScalarField& u,
                     const ScalarField& F, int order) {
    const int m = x_spec.dim();
    const int n = ambient.n();
    const int k = ambient.k;
    const int wd = m + 1;

    SliceScan out;
    out.has_crosscheck = (k == 2);
    out.rtilde.assign(x_grid.total, 0.0);

    const MetricSpec bar = with_circle(ambient);
    std::vector<int> bmap(bar.dim(), -1), wmap(wd);
    for (int i = 0; i < m; ++i) bmap[i] = i;
    bmap[bar.dim() - 1] = m;
    for (int i = 0; i < wd; ++i) wmap[i] = i;

    ScalarField ux(x_grid.total), phi(x_grid.total);
    std::vector<int> xidx(m), widx(wd, 0);
    for (int64_t ix = 0; ix < x_grid.total; ++ix) {
        x_grid.unravel(ix, xidx);
        std::copy(xidx.begin(), xidx.end(), widx.begin());
        widx[m] = 0;
        const double v = u[w_grid.index(widx)] + 1.0;
        ux[ix] = v;
        phi[ix] = v > 0.0 ? (2.0 / (n - 2)) * std::log(v)
                          : std::numeric_limits<double>::quiet_NaN();
        if (!(v > 0.0)) out.finite = false;
    }
    const ScalarField lap_phi = laplace_beltrami(x_spec, x_grid, phi, order);

    std::vector<double> xpt(m), wpt, ypt, barpt, xfull;
    for (int64_t ix = 0; ix < x_grid.total; ++ix) {
        x_grid.unravel(ix, xidx);
        x_grid.point(xidx, xpt);
        std::copy(xidx.begin(), xidx.end(), widx.begin());
        widx[m] = 0;
        const int64_t iw = w_grid.index(widx);

        xfull = xpt;
        xfull.resize(ambient.dim(), 0.0);
        wpt = xpt;
        wpt.push_back(0.0);

        SliceTower tw = slice_tower(ambient, xpt);
        double extr = 0.0;
        for (const auto& st : tw.extrinsic)
            extr += -2.0 * st.ric_nn + st.h * st.h - st.normA2;

        std::array<double, kMaxVars> du{};
        for (int i = 0; i < m; ++i) du[i] = diff1(w_grid, u, widx, i, order);

        // direct transformation law on the slice
        const PointMetric pm_x = metric_at(x_spec, xpt);
        double grad_phi2 = 0.0;
        {
            std::array<double, kMaxVars> dphi{};
            for (int i = 0; i < m; ++i) dphi[i] = diff1(x_grid, phi, xidx, i, order);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    grad_phi2 += pm_x.at(pm_x.ginv, i, j) * dphi[i] * dphi[j];
        }
        const double rx = curvature_at(x_spec, xpt).scalar;
        const double direct =
            std::exp(-2.0 * phi[ix]) *
            (rx - 2.0 * (m - 1) * lap_phi[ix] - (m - 1.0) * (m - 2.0) * grad_phi2);
        out.rtilde[ix] = direct;
        if (std::isfinite(direct)) {
            out.rtilde_min = std::min(out.rtilde_min, direct);
            out.rtilde_max = std::max(out.rtilde_max, direct);
            out.direct_max = std::max(out.direct_max, std::abs(direct));
        } else {
            out.finite = false;
        }

        // first order quotient and the gradient in the X x R_1 block
        const double uval = ux[ix];
        ypt = xpt;
        ypt.push_back(0.0);
        const PointMetric pm_y = metric_at(tw.levels[1], ypt);
        double grad_y2 = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) grad_y2 += pm_y.at(pm_y.ginv, i, j) * du[i] * du[j];
        std::vector<double> dv(k, 0.0);
        double qsum = 0.0;
        for (int s = 0; s < k; ++s) {
            for (int i = 0; i < m; ++i) dv[s] += tw.proj[s].V[i] * du[i];
            qsum += n * (n + k - s - 3.0) * dv[s] * dv[s];
        }
        qsum += (n - 2.0) * grad_y2;
        const double quot = 4.0 / ((n - 2.0) * (n - 2.0)) * std::abs(qsum / uval);
        if (std::isfinite(quot)) out.quotient_max = std::max(out.quotient_max, quot);

        // Laplacian comparison between the full ambient and the product on W
        barpt = xfull;
        barpt.push_back(0.0);
        const PointMetric pm_bar = metric_at(bar, barpt);
        const Christoffel ch_bar = christoffel(pm_bar);
        const PointMetric pm_w = metric_at(w_spec, wpt);
        const Christoffel ch_w = christoffel(pm_w);
        const double lap_bar = laplacian_at(pm_bar, ch_bar, w_grid, u, widx, bmap, order);
        const double lap_w = laplacian_at(pm_w, ch_w, w_grid, u, widx, wmap, order);
        const double a1 = lap_bar - lap_w;
        out.a1_max = std::max(out.a1_max, std::abs(a1));

        if (k != 2 || !(uval > 0.0)) continue;

        // substituted right side of the sliced curvature identity
        const double utt = diff2(w_grid, u, widx, m, order);
        const PointMetric pm_amb = metric_at(ambient, xfull);
        const Christoffel ch_amb = christoffel(pm_amb);
        const Christoffel ch_y = christoffel(pm_y);
        auto gap = [&](const Christoffel& full, const std::vector<double>& V) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    const double w = V[i] * V[j];
                    if (w == 0.0) continue;
                    for (int c = 0; c < m; ++c)
                        acc -= w * (full.G[c][i * S + j] - ch_w.G[c][i * S + j]) * du[c];
                }
            return acc;
        };
        const double d1gap = gap(ch_amb, tw.proj[0].V);
        const double d2gap = gap(ch_y, tw.proj[1].V);
        const double qsigned = 4.0 / ((n - 2.0) * (n - 2.0)) *
                               (-n * (n - 1.0) * dv[0] * dv[0] / uval -
                                n * (n - 2.0) * dv[1] * dv[1] / uval +
                                (n - 2.0) * grad_y2 / uval);
        const double rbar = curvature_at(ambient, xfull).scalar;
        const double bracket = extr * uval + F[iw] + rbar - 4.0 * a1 + 4.0 * utt +
                               4.0 * (n - 1.0) / (n - 2.0) * d1gap + 4.0 * d2gap + qsigned;
        const double assembled = std::pow(uval, -(n + 2.0) / (n - 2.0)) * bracket;
        if (std::isfinite(assembled) && std::isfinite(direct))
            out.dev_max = std::max(out.dev_max, std::abs(direct - assembled));
        else
            out.finite = false;
    }
    return out;
}

std::string gate_failure_text(const PipelineAttempt& at, const PipelineConfig& cfg) {
    const GateReport& g = at.gates;
    std::string why;
    if (!g.c1alpha_ok)
        why += fmt("C1alpha norm %.4g (need < %.3g); ", g.c1alpha, cfg.eta);
    if (!g.d2t_ok) {
        if (g.d2t_measured)
            why += fmt("second t derivative %.4g (need < %.3g); ", g.d2t, cfg.eta_prime);
        else
            why += "second t derivative window unresolved; ";
    }
    if (!g.uw_ok)
        why += fmt("u_W range [%.4g, %.4g] outside (0.5, 1.5); ", g.uw_min, g.uw_max);
    if (!g.quotient_ok)
        why += fmt("first order quotient %.4g (need < 1); ", g.quotient_max);
    if (!at.note.empty()) why += at.note + "; ";
    if (!why.empty()) why.erase(why.size() - 2);
    return why;
}

} // namespace

const char* pipeline_verdict_name(PipelineVerdict v) {
    switch (v) {
        case PipelineVerdict::Success: return "SUCCESS";
        case PipelineVerdict::AngleFail: return "ANGLE-FAIL";
        case PipelineVerdict::GateFail: return "GATE-FAIL";
        case PipelineVerdict::SolverFail: return "SOLVER-FAIL";
        case PipelineVerdict::HypothesisFail: return "HYPOTHESIS-FAIL";
    }
    return "UNKNOWN";
}

ConformalLaw conformal_scalar_law(const MetricSpec& spec, const ExprPtr& phi,
                                  const std::vector<double>& x) {
    const int d = spec.dim();
    ConformalLaw out;
    out.direct = curvature_at(conformal_rescale(spec, phi), x).scalar;

    const PointMetric pm = metric_at(spec, x);
    const Christoffel ch = christoffel(pm);
    const Jet2 pj = eval_jet2(phi, x, spec.coords);
    double lap = 0.0, grad2 = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double gi = pm.at(pm.ginv, i, j);
            if (gi == 0.0) continue;
            double hij = pj.hess(i, j);
            for (int c = 0; c < d; ++c) hij -= ch.G[c][i * S + j] * pj.grad(c);
            lap += gi * hij;
            grad2 += gi * pj.grad(i) * pj.grad(j);
        }
    const double r = curvature_at(spec, x).scalar;
    out.formula = std::exp(-2.0 * pj.v) *
                  (r - 2.0 * (d - 1) * lap - (d - 1.0) * (d - 2.0) * grad2);
    return out;
}

CConstant compute_C_constant(const MetricSpec& ambient, const ChartGrid& x_grid,
                             double margin) {
    CConstant out;
    std::vector<int> idx(x_grid.ndim());
    std::vector<double> xpt;
    for (int64_t i = 0; i < x_grid.total; ++i) {
        x_grid.unravel(i, idx);
        x_grid.point(idx, xpt);
        const SliceTower tw = slice_tower(ambient, xpt);
        double s = 0.0;
        for (const auto& st : tw.extrinsic)
            s += 2.0 * std::abs(st.ric_nn) + st.h * st.h + st.normA2;
        out.extrinsic_max = std::max(out.extrinsic_max, s);
    }
    out.value = 2.0 * out.extrinsic_max + 3.0 + margin;
    return out;
}

HermitianCheck hermitian_compatibility(const MetricSpec& ambient, const ChartGrid& x_grid,
                                       const ExprPtr& phi) {
    HermitianCheck out;
    const MetricSpec xs = restrict_to_x(ambient);
    const int m = xs.dim();
    if (m % 2 != 0) return out;
    out.applicable = true;

    std::array<std::array<double, kMaxVars>, kMaxVars> J{};
    for (int a = 0; a + 1 < m; a += 2) {
        J[a + 1][a] = 1.0;
        J[a][a + 1] = -1.0;
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double s = (i == j) ? 1.0 : 0.0;
            for (int l = 0; l < m; ++l) s += J[i][l] * J[l][j];
            out.j_squared_dev = std::max(out.j_squared_dev, std::abs(s));
        }

    const MetricSpec rs = conformal_rescale(xs, phi);
    auto dev = [&](const MetricSpec& spec) {
        double worst = 0.0;
        std::vector<int> idx(x_grid.ndim());
        std::vector<double> x;
        for (int64_t node = 0; node < x_grid.total; ++node) {
            x_grid.unravel(node, idx);
            x_grid.point(idx, x);
            const PointMetric pm = metric_at(spec, x);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double pulled = 0.0;
                    for (int a = 0; a < m; ++a)
                        for (int b = 0; b < m; ++b)
                            pulled += J[a][i] * pm.g[a * S + b] * J[b][j];
                    worst = std::max(worst, std::abs(pulled - pm.g[i * S + j]));
                }
        }
        return worst;
    };
    out.base_dev = dev(xs);
    out.rescaled_dev = dev(rs);
    return out;
}

Crosscheck crosscheck_conformal_identity(const MetricSpec& ambient, const ChartGrid& x_grid,
                                         const ChartGrid& w_grid, const ScalarField& u,
                                         const ScalarField& F, int order) {
    if (ambient.k != 2)
        throw SolverError("crosscheck requires exactly two line directions");
    const MetricSpec xs = restrict_to_x(ambient);
    const int m = xs.dim();
    if (w_grid.ndim() != m + 1 || x_grid.ndim() != m)
        throw SolverError("crosscheck grids do not match the sliced factor");
    for (int i = 0; i < m; ++i)
        if (w_grid.axes[i].n != x_grid.axes[i].n || w_grid.axes[i].h != x_grid.axes[i].h ||
            w_grid.axes[i].x0 != x_grid.axes[i].x0)
            throw SolverError("crosscheck grids disagree on the closed factor axes");
    if (static_cast<int64_t>(u.size()) != w_grid.total ||
        static_cast<int64_t>(F.size()) != w_grid.total)
        throw SolverError("crosscheck fields do not match the grid");

    const MetricSpec ws = with_circle(xs, w_grid.axes[m].h * w_grid.axes[m].n);
    const SliceScan sc = scan_slice(ambient, xs, ws, x_grid, w_grid, u, F, order);
    Crosscheck out;
    out.max_dev = sc.dev_max;
    out.max_direct = sc.direct_max;
    out.a1_max = sc.a1_max;
    return out;
}

WOperator build_w_operator(const MetricSpec& ambient, std::vector<int> x_counts,
                           int t_count, int order) {
    if (ambient.k < 1)
        throw SolverError("operator assembly requires at least one line direction");
    if (ambient.x_dim < 2)
        throw SolverError("operator assembly requires a closed factor of dimension at least 2");

    WOperator wo;
    wo.x_spec = restrict_to_x(ambient);
    const int m = wo.x_spec.dim();
    const int n = ambient.n();
    const int k = ambient.k;
    const int wd = m + 1;

    if (x_counts.empty()) x_counts.assign(m, 64);
    if (static_cast<int>(x_counts.size()) != m)
        throw SolverError("x_counts does not match the closed factor dimension");
    wo.x_grid = ChartGrid::make(wo.x_spec, x_counts);
    wo.w_spec = with_circle(wo.x_spec);
    std::vector<int> wc = x_counts;
    wc.push_back(t_count);
    wo.w_grid = ChartGrid::make(wo.w_spec, wc);

    // stage drift fields sampled on the slice, skipped where they vanish
    ScalarField rbar_x(wo.x_grid.total);
    wo.rbar_min = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> vx(k);
    std::vector<char> active(k, 0);
    {
        std::vector<int> idx(m);
        std::vector<double> xpt;
        for (int s = 0; s < k; ++s)
            vx[s].assign(wo.x_grid.total * static_cast<size_t>(m), 0.0);
        for (int64_t ix = 0; ix < wo.x_grid.total; ++ix) {
            wo.x_grid.unravel(ix, idx);
            wo.x_grid.point(idx, xpt);
            const SliceTower tw = slice_tower(ambient, xpt);
            for (int s = 0; s < k; ++s) {
                double mx = 0.0;
                for (int i = 0; i < m; ++i) {
                    vx[s][ix * m + i] = tw.proj[s].V[i];
                    mx = std::max(mx, std::abs(tw.proj[s].V[i]));
                }
                if (mx > 1e-12) active[s] = 1;
            }
            xpt.resize(ambient.dim(), 0.0);
            rbar_x[ix] = curvature_at(ambient, xpt).scalar;
            wo.rbar_min = std::min(wo.rbar_min, rbar_x[ix]);
        }
    }
    std::vector<ScalarField> fields;
    std::vector<double> coeffs;
    for (int s = 0; s < k; ++s)
        if (active[s]) {
            fields.emplace_back(wo.w_grid.total * static_cast<size_t>(wd), 0.0);
            coeffs.push_back(4.0 * (n + k - s - 3.0) / (n - 2.0));
        }
    wo.rbar.assign(wo.w_grid.total, 0.0);
    {
        std::vector<int> widx(wd), xidx(m);
        for (int64_t iw = 0; iw < wo.w_grid.total; ++iw) {
            wo.w_grid.unravel(iw, widx);
            std::copy(widx.begin(), widx.begin() + m, xidx.begin());
            const int64_t ix = wo.x_grid.index(xidx);
            wo.rbar[iw] = rbar_x[ix];
            int fi = 0;
            for (int s = 0; s < k; ++s)
                if (active[s]) {
                    for (int i = 0; i < m; ++i)
                        fields[fi][iw * wd + i] = vx[s][ix * m + i];
                    ++fi;
                }
        }
    }
    wo.op = assemble_operator(wo.w_spec, wo.w_grid, fields, coeffs, -4.0, wo.rbar, order);
    return wo;
}

PipelineReport run_pipeline(const MetricSpec& ambient, const PipelineConfig& cfg) {
    if (ambient.k < 2)
        throw SolverError("pipeline requires at least two line directions");
    if (ambient.x_dim < 2)
        throw SolverError("pipeline requires a closed factor of dimension at least 2");

    PipelineReport rep;
    rep.x_spec = restrict_to_x(ambient);
    rep.w_spec = with_circle(rep.x_spec);
    const int m = rep.x_spec.dim();
    const int n = ambient.n();

    std::vector<int> xc = cfg.x_counts;
    if (xc.empty()) xc.assign(m, 64);
    if (static_cast<int>(xc.size()) != m)
        throw SolverError("x_counts does not match the closed factor dimension");
    const ChartGrid x_grid = ChartGrid::make(rep.x_spec, xc);
    std::vector<int> wc = xc;
    wc.push_back(cfg.t_count);
    const ChartGrid w_grid = ChartGrid::make(rep.w_spec, wc);

    rep.angle = check_angle_condition(ambient, x_grid);
    if (rep.angle.verdict == Verdict::Fail) {
        rep.verdict = PipelineVerdict::AngleFail;
        rep.reason = fmt("angle condition failed: max lhs %.6g, min(rhs - lhs) %.6g at node %lld",
                         rep.angle.max_lhs, rep.angle.min_margin,
                         static_cast<long long>(rep.angle.worst_node));
        return rep;
    }
    if (rep.angle.verdict == Verdict::Indeterminate) {
        rep.verdict = PipelineVerdict::AngleFail;
        rep.reason = "angle condition indeterminate: degeneracy mixed across stages or nodes";
        return rep;
    }

    WOperator wo = build_w_operator(ambient, xc, cfg.t_count, cfg.order);
    rep.rbar_min = wo.rbar_min;
    rep.kappa0 = cfg.kappa0;
    const bool floor_ok =
        cfg.kappa0 > 0.0
            ? rep.rbar_min >= cfg.kappa0 - 1e-9 * std::max(1.0, cfg.kappa0)
            : rep.rbar_min > 0.0;
    if (!floor_ok) {
        rep.verdict = PipelineVerdict::HypothesisFail;
        rep.reason = fmt("scalar curvature floor fails: min R = %.6g, floor %.6g",
                         rep.rbar_min, cfg.kappa0);
        return rep;
    }

    rep.cert = ellipticity_certificate(ambient, x_grid);
    if (!rep.cert.elliptic && !cfg.force) {
        rep.verdict = PipelineVerdict::SolverFail;
        rep.reason = fmt("ellipticity certificate failed: min symbol eigenvalue %.6g at node %lld",
                         rep.cert.min_eig, static_cast<long long>(rep.cert.worst_node));
        return rep;
    }

    const CConstant cc = compute_C_constant(ambient, x_grid, cfg.margin);
    rep.C = cc.value;

    const double ht = w_grid.axes[m].h;
    const double period = ht * w_grid.axes[m].n;
    const double amp = rep.C + 1.0;
    const double p = cfg.p > 0.0 ? cfg.p : n + 1.0;
    double eps0 = period / 4.0;
    std::string eps_note;
    if (cfg.delta > 0.0) {
        const EpsilonChoice ch = choose_epsilon(rep.w_spec, w_grid, amp, cfg.delta, p, eps0);
        eps0 = ch.eps;
        if (!ch.resolvable)
            eps_note = "mass-driven support width is below the grid resolution";
    }

    bool passed = false;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        PipelineAttempt at;
        at.eps = eps0 * std::pow(0.5, attempt);
        if (attempt == 0) at.note = eps_note;
        if (at.eps < 4.0 * ht) {
            if (!at.note.empty()) at.note += "; ";
            at.note += "support narrower than four t spacings, not solvable at this resolution";
            rep.attempts.push_back(std::move(at));
            break;
        }
        const BumpSpec bump{amp, at.eps, period, true};
        const ScalarField rhs = build_bump_rhs(w_grid, bump);
        PdeSolution sol = solve_operator(wo.op, rhs, cfg.tol, cfg.max_iter);
        at.stats = sol.stats;
        if (!sol.stats.converged) {
            rep.verdict = PipelineVerdict::SolverFail;
            rep.reason = fmt("linear solver stalled at relative residual %.3g after %d iterations",
                             sol.stats.rel_residual, sol.stats.iterations);
            rep.u = std::move(sol.u);
            rep.attempts.push_back(std::move(at));
            return rep;
        }

        GateReport g;
        g.c1alpha = norm_c1alpha(w_grid, sol.u, cfg.alpha, cfg.seed);
        g.c1alpha_ok = g.c1alpha < cfg.eta;
        try {
            g.d2t = second_t_derivative_sup(w_grid, sol.u, at.eps);
            g.d2t_measured = true;
            g.d2t_ok = g.d2t < cfg.eta_prime;
        } catch (const SolverError& e) {
            g.d2t_measured = false;
            g.d2t_ok = false;
            at.note = e.what();
        }
        double umin = sol.u[0], umax = sol.u[0];
        for (double v : sol.u) {
            umin = std::min(umin, v);
            umax = std::max(umax, v);
        }
        g.uw_min = umin + 1.0;
        g.uw_max = umax + 1.0;
        g.uw_ok = g.uw_min > 0.5 && g.uw_max < 1.5;

        const SliceScan sc =
            scan_slice(ambient, rep.x_spec, rep.w_spec, x_grid, w_grid, sol.u, rhs, cfg.order);
        g.quotient_max = sc.quotient_max;
        g.quotient_ok = sc.finite && sc.quotient_max < 1.0;
        g.a1_max = sc.a1_max;
        g.a1_ok = 4.0 * sc.a1_max < 1.0;
        at.gates = g;
        at.rtilde_min = sc.rtilde_min;
        at.rtilde_max = sc.rtilde_max;
        at.crosscheck_dev = sc.dev_max;
        at.crosscheck_scale = sc.direct_max;

        rep.u = std::move(sol.u);
        rep.rtilde = sc.rtilde;
        rep.attempts.push_back(std::move(at));
        if (g.pass()) {
            passed = true;
            break;
        }
    }

    if (rep.attempts.empty()) {
        rep.verdict = PipelineVerdict::GateFail;
        rep.reason = "no support width was attempted";
        return rep;
    }
    const PipelineAttempt& last = rep.attempts.back();
    if (passed) {
        if (std::isfinite(last.rtilde_min) && last.rtilde_min > 0.0) {
            rep.verdict = PipelineVerdict::Success;
            rep.reason = fmt("gates passed at eps %.6g, transformed curvature min %.6g",
                             last.eps, last.rtilde_min);
        } else {
            rep.verdict = PipelineVerdict::GateFail;
            rep.reason = fmt("gates passed but the transformed curvature is not positive (min %.6g)",
                             last.rtilde_min);
        }
    } else {
        rep.verdict = PipelineVerdict::GateFail;
        const std::string why = gate_failure_text(last, cfg);
        rep.reason = fmt("gates not met down to eps %.6g: %s", last.eps, why.c_str());
    }
    return rep;
}

} // namespace psc

#include "psc/angle.hpp"

#include <cmath>
#include <limits>

namespace psc {

namespace {
constexpr int S = kMaxVars;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        default: return "INDETERMINATE";
    }
}

AngleTerms angle_terms(const MetricSpec& ambient, const std::vector<double>& x_point) {
    SliceTower tw = slice_tower(ambient, x_point);
    const int n = tw.n;
    const int zeta = ambient.x_dim;

    std::vector<double> pt1(x_point);
    pt1.push_back(0.0);
    PointMetric g1 = metric_at(tw.levels[1], pt1);
    const double g11 = g1.g[zeta * S + zeta];

    auto pair_with_zeta = [&](const std::vector<double>& V, double a) {
        double s = 0.0;
        for (int c = 0; c < zeta; ++c) s += g1.g[c * S + zeta] * V[c];
        s += g1.g[zeta * S + zeta] * a;
        return s;
    };

    AngleTerms at;
    const int stages = tw.k;  // proj[0..k-2] are j = k..2, proj[k-1] is the final normal
    int degenerate_count = 0;
    for (int s = 0; s + 1 < stages; ++s) {
        const int j = tw.k - s;
        const double cj = static_cast<double>(n + j - 3) / (n - 2);
        const ProjectedNormal& pr = tw.proj[s];
        at.degenerate.push_back(pr.degenerate);
        if (pr.degenerate) {
            at.A.push_back(0.0);
            at.B.push_back(0.0);
            ++degenerate_count;
            continue;
        }
        const double ip = pair_with_zeta(pr.V, pr.a);
        at.A.push_back(cj * g11 / (ip * ip));
        at.B.push_back(cj);
    }

    const ProjectedNormal& fin = tw.proj[stages - 1];
    const double ipf = pair_with_zeta(fin.V, fin.a);
    at.A.push_back(g11 / (ipf * ipf));
    at.B.push_back(0.0);
    at.degenerate.push_back(false);

    at.lhs = 0.0;
    at.rhs = 2.0;
    for (std::size_t i = 0; i < at.A.size(); ++i) {
        at.lhs += at.A[i];
        at.rhs += at.B[i];
    }
    const int upper = stages - 1;
    at.all_degenerate = upper > 0 && degenerate_count == upper;
    at.mixed = degenerate_count > 0 && degenerate_count < upper;
    return at;
}

AngleReport check_angle_condition(const MetricSpec& ambient, const ChartGrid& x_grid,
                                  bool keep_nodes) {
    AngleReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.max_lhs = -std::numeric_limits<double>::infinity();

    bool any_nan = false;
    int branch_seen = -1;  // 0 nondegenerate, 1 all-degenerate
    bool mixed = false;
    bool all_strict = true;

    for (std::int64_t idx = 0; idx < x_grid.total; ++idx) {
        std::vector<double> x = x_grid.point(idx);
        AngleTerms at = angle_terms(ambient, x);
        if (at.mixed) mixed = true;
        const int branch = at.all_degenerate ? 1 : 0;
        if (branch_seen < 0) branch_seen = branch;
        else if (branch_seen != branch) mixed = true;

        if (std::isnan(at.lhs)) any_nan = true;
        if (!(at.lhs < at.rhs)) all_strict = false;

        const double margin = at.rhs - at.lhs;
        if (margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.worst_node = idx;
            rep.worst_point = x;
        }
        rep.max_lhs = std::max(rep.max_lhs, at.lhs);
        if (keep_nodes) rep.nodes.push_back({idx, at.lhs, at.rhs, at.all_degenerate});
    }

    rep.degenerate_branch = branch_seen == 1;
    rep.mixed_degeneracy = mixed;
    if (mixed || any_nan)
        rep.verdict = Verdict::Indeterminate;
    else
        rep.verdict = all_strict ? Verdict::Pass : Verdict::Fail;
    return rep;
}

double conformal_invariance_gap(const MetricSpec& ambient, const ExprPtr& phi,
                                const ChartGrid& x_grid) {
    MetricSpec rescaled = conformal_rescale(ambient, phi);
    double gap = 0.0;
    for (std::int64_t idx = 0; idx < x_grid.total; ++idx) {
        std::vector<double> x = x_grid.point(idx);
        AngleTerms a = angle_terms(ambient, x);
        AngleTerms b = angle_terms(rescaled, x);
        gap = std::max(gap, std::abs(a.lhs - b.lhs));
        gap = std::max(gap, std::abs(a.rhs - b.rhs));
    }
    return gap;
}

EllipticityCertificate ellipticity_certificate(const MetricSpec& ambient,
                                               const ChartGrid& x_grid,
                                               bool keep_nodes) {
    EllipticityCertificate cert;
    cert.min_eig = std::numeric_limits<double>::infinity();
    cert.q_max = -std::numeric_limits<double>::infinity();
    const int m = ambient.x_dim;
    const int n = ambient.n();

    for (std::int64_t idx = 0; idx < x_grid.total; ++idx) {
        std::vector<double> x = x_grid.point(idx);
        SliceTower tw = slice_tower(ambient, x);
        PointMetric gx = metric_at(tw.levels[0], x);
        linalg::Mat root{};
        linalg::sym_sqrt(gx.g, m, root);

        // drift fields: stage projections with the coefficient ladder, then
        // the final normal with coefficient 1
        std::vector<std::pair<double, const std::vector<double>*>> fields;
        for (int s = 0; s + 1 < tw.k; ++s) {
            const int j = tw.k - s;
            if (tw.proj[s].degenerate) continue;
            fields.push_back({static_cast<double>(n + j - 3) / (n - 2), &tw.proj[s].V});
        }
        fields.push_back({1.0, &tw.proj[tw.k - 1].V});

        linalg::Mat M{};
        for (int a = 0; a < m; ++a) M[a * S + a] = 1.0;
        double q = 0.0;
        for (const auto& [c, Vp] : fields) {
            const std::vector<double>& V = *Vp;
            linalg::Vec w{};
            for (int a = 0; a < m; ++a) {
                double s = 0.0;
                for (int b = 0; b < m; ++b) s += root[a * S + b] * V[b];
                w[a] = s;
            }
            double w2 = 0.0;
            for (int a = 0; a < m; ++a) w2 += w[a] * w[a];
            q += c * w2;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) M[a * S + b] -= c * w[a] * w[b];
        }

        linalg::Vec evals{};
        linalg::sym_eigenvalues(M, m, evals);
        const double emin = evals[0];
        if (emin < cert.min_eig) {
            cert.min_eig = emin;
            cert.worst_node = idx;
        }
        cert.q_max = std::max(cert.q_max, q);
        if (keep_nodes) cert.nodes.push_back({q, emin});
    }
    cert.elliptic = cert.min_eig > 0.0;
    return cert;
}

SylvesterMinors sylvester_minors(const std::vector<double>& b, double C2) {
    const int k = static_cast<int>(b.size());
    if (k < 1 || k > kMaxVars) throw GeometryError("sylvester minor dimension out of range");
    SylvesterMinors sm;
    double b2 = 0.0;
    for (int j = 1; j <= k; ++j) {
        b2 += b[j - 1] * b[j - 1];
        linalg::Mat M{};
        for (int a = 0; a < j; ++a)
            for (int c = 0; c < j; ++c)
                M[a * S + c] = (a == c ? C2 : 0.0) - b[a] * b[c];
        linalg::Mat inv{};
        double det = 0.0;
        linalg::invert(M, j, inv, det);
        sm.direct.push_back(det);
        sm.eigenform.push_back(std::pow(C2, j - 1) * (C2 - b2));
        sm.scaled.push_back(std::pow(C2, j) * (C2 - b2));
    }
    return sm;
}

} // namespace psc

#include <doctest.h>

#include <cmath>
#include <random>

#include "psc/conformal.hpp"
#include "psc/registry.hpp"
#include "test_support.hpp"

using namespace psc;

TEST_SUITE("units") {

TEST_CASE("restriction slices every line direction away") {
    const MetricSpec s = registry_spec("example-2-1");
    const MetricSpec xs = restrict_to_x(s);
    CHECK(xs.dim() == 2);
    CHECK(xs.k == 0);
    CHECK(xs.coords[0] == "x1");
    const MetricSpec none = restrict_to_x(xs);
    CHECK(none.dim() == 2);
}

TEST_CASE("C constant of a plain product") {
    const MetricSpec s = registry_spec("round-sphere");
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(s), {12, 12});
    const CConstant c = compute_C_constant(s, x_grid);
    CHECK(c.extrinsic_max == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.value == doctest::Approx(4.0));
}

TEST_CASE("hermitian compatibility of flat and curved blocks") {
    const std::vector<std::string> vars = {"x1", "x2", "zeta", "xi"};
    const ExprPtr phi = parse_expr("0.3*sin(x1)", vars);
    const MetricSpec flat = registry_spec("flat-torus");
    const ChartGrid fg = ChartGrid::make(restrict_to_x(flat), {10, 10});
    const HermitianCheck hc = hermitian_compatibility(flat, fg, phi);
    CHECK(hc.applicable);
    CHECK(hc.j_squared_dev <= 1e-12);
    CHECK(hc.base_dev <= 1e-12);
    CHECK(hc.rescaled_dev <= 1e-12);

    const MetricSpec sphere = registry_spec("round-sphere");
    const ChartGrid sg = ChartGrid::make(restrict_to_x(sphere), {10, 10});
    const std::vector<std::string> svars = {"theta", "phi", "zeta", "xi"};
    const HermitianCheck sc =
        hermitian_compatibility(sphere, sg, parse_expr("0.1*cos(theta)", svars));
    CHECK(sc.applicable);
    CHECK(sc.base_dev > 1e-3);
}

TEST_CASE("w operator broadcasts the slice curvature") {
    const MetricSpec s = registry_spec("round-sphere");
    const WOperator wo = build_w_operator(s, {8, 8}, 10);
    CHECK(wo.x_grid.total == 64);
    CHECK(wo.w_grid.total == 640);
    CHECK(wo.w_spec.dim() == 3);
    CHECK(wo.rbar_min == doctest::Approx(2.0).epsilon(1e-9));
    for (std::int64_t f = 0; f < wo.w_grid.total; ++f)
        CHECK(wo.rbar[f] == doctest::Approx(2.0).epsilon(1e-9));
    // constants map to the potential, so the drift and Laplacian cancel
    std::vector<double> ones(wo.w_grid.total, 1.0), out;
    wo.op.A.multiply(ones, out);
    for (std::int64_t f = 0; f < wo.w_grid.total; ++f)
        CHECK(out[f] == doctest::Approx(wo.rbar[f]).epsilon(1e-10));
}

TEST_CASE("w operator rejects missing line directions") {
    const MetricSpec closed = registry_spec("sphere-circle");
    CHECK_THROWS_AS(build_w_operator(closed, {8, 8}, 8), SolverError);
}

TEST_CASE("crosscheck identity is exact on the unperturbed product") {
    const MetricSpec s = registry_spec("round-sphere");
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(s), {12, 12});
    const MetricSpec w_spec = with_circle(restrict_to_x(s));
    const ChartGrid w_grid = ChartGrid::make(w_spec, {12, 12, 8});
    const ScalarField u(w_grid.total, 0.0);
    const ScalarField F(w_grid.total, 0.0);
    const Crosscheck cc = crosscheck_conformal_identity(s, x_grid, w_grid, u, F);
    // with u identically zero both sides reduce to the slice curvature and
    // the deviation is the tower identity residual
    CHECK(cc.max_dev <= 1e-8);
    CHECK(cc.max_direct == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("pipeline stops early on the angle violation") {
    const MetricSpec s = registry_spec("example-2-1");
    PipelineConfig cfg;
    cfg.x_counts = {8, 8};
    cfg.t_count = 8;
    const PipelineReport rep = run_pipeline(s, cfg);
    CHECK(rep.verdict == PipelineVerdict::AngleFail);
    CHECK(rep.angle.verdict == Verdict::Fail);
    CHECK(rep.attempts.empty());
    CHECK(rep.reason.find("angle") != std::string::npos);
}

TEST_CASE("pipeline enforces the positivity floor") {
    const MetricSpec s = registry_spec("flat-torus");
    PipelineConfig cfg;
    cfg.x_counts = {8, 8};
    cfg.t_count = 8;
    const PipelineReport rep = run_pipeline(s, cfg);
    CHECK(rep.verdict == PipelineVerdict::HypothesisFail);
    CHECK(rep.rbar_min == doctest::Approx(0.0));
    CHECK(rep.attempts.empty());
}

TEST_CASE("pipeline reports gate failures honestly on coarse grids") {
    const MetricSpec s = registry_spec("round-sphere");
    PipelineConfig cfg;
    cfg.x_counts = {12, 12};
    cfg.t_count = 8;
    cfg.kappa0 = 2.0;
    cfg.retries = 2;
    const PipelineReport rep = run_pipeline(s, cfg);
    CHECK(rep.verdict == PipelineVerdict::GateFail);
    CHECK(rep.C == doctest::Approx(4.0));
    CHECK(rep.cert.elliptic);
    // every recorded attempt either converged and failed a gate or was
    // stopped as unresolvable before solving
    for (const PipelineAttempt& at : rep.attempts) {
        if (at.note.empty()) {
            CHECK(at.stats.converged);
            CHECK_FALSE(at.gates.pass());
        }
    }
}

TEST_CASE("strong tilts fail the angle condition before anything solves") {
    // for a single active stage the angle condition and the symbol bound
    // cross at the same coupling strength, so the angle check screens the
    // nonelliptic case out first
    const MetricSpec bad = registry_spec("perturbed-product", {{"amp", 0.9}});
    PipelineConfig cfg;
    cfg.x_counts = {8, 8};
    cfg.t_count = 8;
    cfg.retries = 1;
    const PipelineReport rep = run_pipeline(bad, cfg);
    CHECK(rep.verdict == PipelineVerdict::AngleFail);
    CHECK(rep.attempts.empty());
}

} // TEST_SUITE("units")

TEST_SUITE("properties") {

TEST_CASE("transformation law matches direct curvature of the rescaled metric") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> amp(-0.4, 0.4);
    std::uniform_real_distribution<double> th(0.4, M_PI - 0.4);
    std::uniform_real_distribution<double> ph(0.0, 2 * M_PI);

    const MetricSpec sphere = registry_spec("round-sphere");
    const std::vector<std::string> svars = {"theta", "phi", "zeta", "xi"};
    for (int trial = 0; trial < 10; ++trial) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.6f*cos(theta) + %.6f*sin(phi)",
                      amp(rng), amp(rng));
        const ExprPtr phi = parse_expr(buf, svars);
        for (int q = 0; q < 3; ++q) {
            const ConformalLaw law =
                conformal_scalar_law(sphere, phi, {th(rng), ph(rng), 0.3, -0.7});
            CHECK(testsup::rel(law.direct, law.formula) <= 1e-8);
        }
    }

    const MetricSpec ex = registry_spec("example-2-1");
    const std::vector<std::string> evars = {"x1", "x2", "zeta", "xi"};
    std::uniform_real_distribution<double> tor(-2.5, 2.5);
    for (int trial = 0; trial < 10; ++trial) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.6f*sin(x1) + %.6f*cos(x2)",
                      amp(rng), amp(rng));
        const ExprPtr phi = parse_expr(buf, evars);
        const ConformalLaw law =
            conformal_scalar_law(ex, phi, {tor(rng), tor(rng), tor(rng), tor(rng)});
        CHECK(testsup::rel(law.direct, law.formula) <= 1e-8);
    }
}

TEST_CASE("crosscheck deviation shrinks with the grid for a manufactured field") {
    const MetricSpec s = registry_spec("round-sphere");
    double dev[2];
    int pos = 0;
    for (int nn : {10, 20}) {
        const WOperator wo = build_w_operator(s, {nn, nn}, 2 * nn);
        ScalarField u(wo.w_grid.total);
        for (std::int64_t f = 0; f < wo.w_grid.total; ++f) {
            const auto x = wo.w_grid.point(f);
            u[f] = 0.01 * std::cos(x[0]) * std::cos(x[2]);
        }
        ScalarField F;
        wo.op.A.multiply(u, F);
        const Crosscheck cc =
            crosscheck_conformal_identity(s, wo.x_grid, wo.w_grid, u, F);
        dev[pos++] = cc.max_dev;
    }
    CHECK(dev[1] < dev[0]);
    CHECK(dev[0] < 0.05);
}

} // TEST_SUITE("properties")

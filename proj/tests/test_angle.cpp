#include <doctest.h>

#include <cmath>
#include <random>

#include "psc/angle.hpp"
#include "psc/conformal.hpp"
#include "psc/registry.hpp"
#include "test_support.hpp"

using namespace psc;

TEST_SUITE("units") {

TEST_CASE("coupled example violates the condition at the origin") {
    const MetricSpec s = registry_spec("example-2-1");
    const AngleTerms t = angle_terms(s, {0.0, 0.0});
    CHECK(t.lhs == doctest::Approx(287.0).epsilon(1e-12));
    CHECK(t.rhs == doctest::Approx(4.0));
    CHECK(t.lhs > t.rhs);
    CHECK_FALSE(t.all_degenerate);
}

TEST_CASE("flat product reduces to the degenerate branch and passes") {
    const MetricSpec s = registry_spec("flat-torus");
    const AngleTerms t = angle_terms(s, {0.4, 1.7});
    CHECK(t.all_degenerate);
    CHECK(t.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.rhs == doctest::Approx(2.0));
}

TEST_CASE("perturbed product lhs follows the closed form") {
    const double amp = 0.1;
    const MetricSpec s = registry_spec("perturbed-product", {{"amp", amp}});
    for (double th : {0.5, 1.2, 2.0}) {
        const AngleTerms t = angle_terms(s, {th, 0.8});
        const double sec2 = 1.0 / (1.0 - amp * amp * std::sin(th) * std::sin(th));
        CHECK(t.all_degenerate);
        CHECK(t.lhs == doctest::Approx(sec2).epsilon(1e-10));
        CHECK(t.lhs < t.rhs);
    }
}

TEST_CASE("grid verdicts across the registry") {
    struct Row { const char* name; Verdict expect; };
    const Row rows[] = {
        {"example-2-1", Verdict::Fail},
        {"flat-torus", Verdict::Pass},
        {"round-sphere", Verdict::Pass},
        {"perturbed-product", Verdict::Pass},
    };
    for (const Row& r : rows) {
        const MetricSpec s = registry_spec(r.name);
        const MetricSpec xs = restrict_to_x(s);
        std::vector<int> counts(xs.dim(), 12);
        const ChartGrid x_grid = ChartGrid::make(xs, counts);
        const AngleReport rep = check_angle_condition(s, x_grid);
        CHECK(rep.verdict == r.expect);
        if (r.expect == Verdict::Fail) CHECK(rep.min_margin < 0.0);
        if (r.expect == Verdict::Pass) CHECK(rep.min_margin > 0.0);
    }
}

TEST_CASE("node records are kept on request") {
    const MetricSpec s = registry_spec("example-2-1");
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(s), {8, 8});
    const AngleReport rep = check_angle_condition(s, x_grid, true);
    REQUIRE(rep.nodes.size() == 64);
    double worst = rep.nodes[0].rhs - rep.nodes[0].lhs;
    for (const AngleNodeResult& nr : rep.nodes)
        worst = std::min(worst, nr.rhs - nr.lhs);
    CHECK(worst == doctest::Approx(rep.min_margin));
}

TEST_CASE("ellipticity certificate on the registry") {
    // example-2-1 fails the angle condition yet stays elliptic: its normals
    // tilt inside the line block, never along the closed factor
    for (const char* name : {"flat-torus", "round-sphere", "perturbed-product",
                             "example-2-1"}) {
        const MetricSpec s = registry_spec(name);
        const MetricSpec xs = restrict_to_x(s);
        const ChartGrid x_grid = ChartGrid::make(xs, std::vector<int>(xs.dim(), 12));
        const EllipticityCertificate c = ellipticity_certificate(s, x_grid);
        CHECK(c.elliptic);
        CHECK(c.min_eig > 0.0);
        CHECK(c.q_max < 1.0);
    }
    // a strong tilt pushes the drift length past the unit threshold
    const MetricSpec bad = registry_spec("perturbed-product", {{"amp", 0.9}});
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(bad), {12, 12});
    const EllipticityCertificate c = ellipticity_certificate(bad, x_grid);
    CHECK_FALSE(c.elliptic);
    CHECK(c.q_max > 1.0);
    CHECK(c.min_eig < 0.0);
}

TEST_CASE("sylvester minors of a rank-one update") {
    const SylvesterMinors m = sylvester_minors({0.5, 0.5}, 0.6);
    REQUIRE(m.direct.size() == 2);
    CHECK(m.direct[0] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(m.direct[1] == doctest::Approx(0.06).epsilon(1e-12));
    for (size_t i = 0; i < m.direct.size(); ++i)
        CHECK(m.direct[i] == doctest::Approx(m.eigenform[i]).epsilon(1e-12));
    CHECK(m.scaled[0] == doctest::Approx(0.21).epsilon(1e-12));
    CHECK(m.scaled[1] == doctest::Approx(0.036).epsilon(1e-12));
}

} // TEST_SUITE("units")

TEST_SUITE("properties") {

TEST_CASE("the condition is conformally invariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-0.8, 0.8);
    const MetricSpec s = registry_spec("example-2-1");
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(s), {8, 8});
    const std::vector<std::string> vars = {"x1", "x2", "zeta", "xi"};
    for (int trial = 0; trial < 8; ++trial) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.6f*sin(x1) + %.6f*cos(x2)",
                      dist(rng), dist(rng));
        const ExprPtr phi = parse_expr(buf, vars);
        CHECK(conformal_invariance_gap(s, phi, x_grid) <= 1e-9);
    }
}

TEST_CASE("certificate sign matches the symbol eigenvalue sign") {
    // single drift field against a unit block: q < 1 iff the symbol stays
    // positive definite, which the minors witness directly
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> bdist(0.0, 1.4);
    for (int trial = 0; trial < 200; ++trial) {
        const double b1 = bdist(rng), b2 = bdist(rng);
        const double q = b1 * b1 + b2 * b2;
        const SylvesterMinors m = sylvester_minors({b1, b2}, 1.0);
        const bool minors_positive = m.direct[0] > 0.0 && m.direct[1] > 0.0;
        if (std::abs(q - 1.0) < 1e-12) continue;
        CHECK(minors_positive == (q < 1.0));
    }
}

} // TEST_SUITE("properties")

#include <doctest.h>

#include <cmath>
#include <random>

#include "psc/geometry.hpp"
#include "psc/registry.hpp"
#include "test_support.hpp"

using namespace psc;

TEST_SUITE("units") {

TEST_CASE("flat product has zero curvature") {
    const MetricSpec s = registry_spec("flat-torus");
    const std::vector<std::vector<double>> pts = {
        {0, 0, 0, 0}, {1.1, -2.3, 0.4, 1.9}, {3.0, 0.5, -2.0, -2.5}};
    for (const auto& x : pts) {
        const CurvatureData c = curvature_at(s, x);
        CHECK(std::abs(c.scalar) <= 1e-10);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(c.ricci[i * kMaxVars + j]) <= 1e-10);
    }
}

TEST_CASE("round sphere scalar curvature is 2 over r squared") {
    const MetricSpec unit = registry_spec("round-sphere");
    const MetricSpec big = registry_spec("round-sphere", {{"r", 2.0}});
    const double thetas[] = {0.3, 1.0, 1.57, 2.6};
    const double phis[] = {0.0, 2.2, 4.4, 5.9};
    for (double th : thetas)
        for (double ph : phis) {
            CHECK(curvature_at(unit, {th, ph, 0.0, 0.0}).scalar ==
                  doctest::Approx(2.0).epsilon(1e-9));
            CHECK(curvature_at(big, {th, ph, 0.0, 0.0}).scalar ==
                  doctest::Approx(0.5).epsilon(1e-9));
        }
}

TEST_CASE("sphere Christoffel symbols match the closed forms") {
    const MetricSpec s = registry_spec("round-sphere");
    const double th = 0.8;
    const PointMetric pm = metric_at(s, {th, 1.3, 0.0, 0.0});
    const Christoffel ch = christoffel(pm);
    CHECK(ch.G[0][1 * kMaxVars + 1] ==
          doctest::Approx(-std::sin(th) * std::cos(th)).epsilon(1e-12));
    CHECK(ch.G[1][0 * kMaxVars + 1] ==
          doctest::Approx(std::cos(th) / std::sin(th)).epsilon(1e-12));
    CHECK(ch.G[0][0 * kMaxVars + 0] == doctest::Approx(0.0));
}

TEST_CASE("riemann tensor has the expected symmetries on the sphere") {
    const MetricSpec s = registry_spec("round-sphere");
    const CurvatureData c = curvature_at(s, {1.1, 0.7, 0.0, 0.0});
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int cc = 0; cc < 4; ++cc)
                for (int d = 0; d < 4; ++d)
                    CHECK(c.riem(a, b, cc, d) ==
                          doctest::Approx(-c.riem(a, b, d, cc)).epsilon(1e-11));
    // trace of ricci against ginv reproduces the scalar
    const PointMetric pm = metric_at(s, {1.1, 0.7, 0.0, 0.0});
    double tr = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            tr += pm.at(pm.ginv, i, j) * c.ricci[i * kMaxVars + j];
    CHECK(tr == doctest::Approx(c.scalar).epsilon(1e-11));
}

TEST_CASE("coupled block Gaussian curvature at the origin") {
    const MetricSpec block = testsup::coupled_block();
    CHECK(brioschi_K(block, {0.0, 0.0}) ==
          doctest::Approx(144.0 / 20449.0).epsilon(1e-12));
    // strictly positive and under the closed bound a^2/(4 (a^2-1)^2)
    const double pts[][2] = {{-3, -3}, {-1, 2}, {0, 3}, {2, -2}, {3, 3}};
    for (const auto& p : pts) {
        const double k = brioschi_K(block, {p[0], p[1]});
        CHECK(k > 0.0);
        CHECK(k < 9.0 / 256.0);
    }
}

TEST_CASE("scalar curvature of a surface is twice the Gaussian curvature") {
    const MetricSpec block = testsup::coupled_block();
    const std::vector<double> pt = {0.6, -1.1};
    CHECK(curvature_at(block, pt).scalar ==
          doctest::Approx(2.0 * brioschi_K(block, pt)).epsilon(1e-11));
}

TEST_CASE("metric_at rejects indefinite input") {
    const MetricSpec bad = parse_metric_spec(R"({
        "coords": ["x1", "x2"],
        "topology": {"x1": "periodic", "x2": "periodic"},
        "components": {"x1,x1": "-1", "x2,x2": "1"}
    })");
    CHECK_THROWS_AS(metric_at(bad, {0.0, 0.0}), GeometryError);
}

TEST_CASE("sphere area converges at second order") {
    const MetricSpec sphere = parse_metric_spec(R"({
        "coords": ["theta", "phi"],
        "topology": {"theta": {"kind": "polar", "azimuth": "phi"}, "phi": "periodic"},
        "components": {"theta,theta": "1", "phi,phi": "sin(theta)^2"}
    })");
    double err[3];
    int idx = 0;
    for (int nn : {16, 32, 64}) {
        const ChartGrid grid = ChartGrid::make(sphere, {nn, nn});
        err[idx++] = std::abs(volume(sphere, grid) - 4.0 * M_PI);
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
    CHECK(err[2] < 1e-2);
}

TEST_CASE("laplace_beltrami converges at second order on the sphere") {
    const MetricSpec sphere = parse_metric_spec(R"({
        "coords": ["theta", "phi"],
        "topology": {"theta": {"kind": "polar", "azimuth": "phi"}, "phi": "periodic"},
        "components": {"theta,theta": "1", "phi,phi": "sin(theta)^2"}
    })");
    double err[2];
    int idx = 0;
    for (int nn : {16, 32}) {
        const ChartGrid grid = ChartGrid::make(sphere, {nn, nn});
        ScalarField u(grid.total);
        for (std::int64_t f = 0; f < grid.total; ++f)
            u[f] = std::cos(grid.point(f)[0]);
        const ScalarField lap = laplace_beltrami(sphere, grid, u);
        double worst = 0.0;
        for (std::int64_t f = 0; f < grid.total; ++f)
            worst = std::max(worst,
                             std::abs(lap[f] + 2.0 * std::cos(grid.point(f)[0])));
        err[idx++] = worst;
    }
    const double ratio = err[0] / err[1];
    CHECK(ratio > 3.4);
    CHECK(ratio < 4.6);
}

TEST_CASE("covariant directional hessian matches plain derivatives on a flat chart") {
    const MetricSpec flat = parse_metric_spec(R"({
        "coords": ["x1", "x2"],
        "topology": {"x1": "periodic", "x2": "periodic"},
        "components": {"x1,x1": "1", "x2,x2": "1"}
    })");
    const ChartGrid grid = ChartGrid::make(flat, {48, 48});
    ScalarField u(grid.total);
    for (std::int64_t f = 0; f < grid.total; ++f) {
        const auto x = grid.point(f);
        u[f] = std::sin(x[0]) * std::cos(x[1]);
    }
    std::vector<double> V(grid.total * 2, 0.0);
    for (std::int64_t f = 0; f < grid.total; ++f) V[f * 2] = 1.0;
    const ScalarField hvv = covariant_hessian_VV(flat, grid, u, V);
    double worst = 0.0;
    for (std::int64_t f = 0; f < grid.total; ++f) {
        const auto x = grid.point(f);
        worst = std::max(worst, std::abs(hvv[f] + std::sin(x[0]) * std::cos(x[1])));
    }
    CHECK(worst < 5e-3);
}

} // TEST_SUITE("units")

TEST_SUITE("properties") {

TEST_CASE("metric derivative jets agree with finite differences") {
    const MetricSpec ex = registry_spec("example-2-1");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x = {dist(rng), dist(rng), dist(rng), dist(rng)};
        const PointMetric pm = metric_at(ex, x);
        const double h = 1e-5;
        for (int kdir = 0; kdir < 4; ++kdir) {
            std::vector<double> xp = x, xm = x;
            xp[kdir] += h;
            xm[kdir] -= h;
            const PointMetric pp = metric_at(ex, xp);
            const PointMetric mm = metric_at(ex, xm);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const double fd = (pp.at(pp.g, i, j) - mm.at(mm.g, i, j)) / (2 * h);
                    CHECK(testsup::rel(pm.at(pm.dg[kdir], i, j), fd) <= 1e-8);
                }
        }
    }
}

TEST_CASE("surface identity R equals 2K holds for random conformal factors") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double c1 = dist(rng), c2 = dist(rng);
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "exp(%.6f*sin(x1) + %.6f*cos(x2))", 0.3 * c1, 0.3 * c2);
        const std::string gxx = buf;
        const std::string cfg = std::string(R"({
            "coords": ["x1", "x2"],
            "topology": {"x1": "periodic", "x2": "periodic"},
            "components": {"x1,x1": ")") + gxx + R"(", "x2,x2": ")" + gxx + R"("}})";
        const MetricSpec s = parse_metric_spec(cfg);
        for (int q = 0; q < 5; ++q) {
            const std::vector<double> x = {dist(rng) * 3, dist(rng) * 3};
            const double R = curvature_at(s, x).scalar;
            const double K = brioschi_K(s, x);
            CHECK(std::abs(R - 2.0 * K) <= 1e-9 * std::max(1.0, std::abs(R)));
        }
    }
}

} // TEST_SUITE("properties")

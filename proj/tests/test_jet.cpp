#include <doctest.h>

#include <cmath>
#include <random>

#include "psc/expr.hpp"
#include "test_support.hpp"

using namespace psc;

namespace {
const std::vector<std::string> xy = {"x", "y"};
}

TEST_SUITE("units") {

TEST_CASE("jet of a polynomial product matches hand derivatives") {
    const ExprPtr e = parse_expr("x^2*y + sin(x*y)", xy);
    const double x = 0.7, y = -1.3;
    const Jet2 j = eval_jet2(e, {x, y}, xy);
    const double c = std::cos(x * y), s = std::sin(x * y);
    CHECK(j.v == doctest::Approx(x * x * y + s).epsilon(1e-14));
    CHECK(j.grad(0) == doctest::Approx(2 * x * y + y * c).epsilon(1e-13));
    CHECK(j.grad(1) == doctest::Approx(x * x + x * c).epsilon(1e-13));
    CHECK(j.hess(0, 0) == doctest::Approx(2 * y - y * y * s).epsilon(1e-13));
    CHECK(j.hess(1, 1) == doctest::Approx(-x * x * s).epsilon(1e-13));
    CHECK(j.hess(0, 1) == doctest::Approx(2 * x + c - x * y * s).epsilon(1e-13));
    CHECK(j.hess(0, 1) == doctest::Approx(j.hess(1, 0)).epsilon(1e-15));
}

TEST_CASE("jet chain rule through exp log sqrt") {
    const ExprPtr e = parse_expr("exp(x)/sqrt(y) + log(x+y)", xy);
    const double x = 0.9, y = 1.6;
    const Jet2 j = eval_jet2(e, {x, y}, xy);
    CHECK(j.v == doctest::Approx(std::exp(x) / std::sqrt(y) + std::log(x + y)));
    CHECK(j.grad(0) ==
          doctest::Approx(std::exp(x) / std::sqrt(y) + 1.0 / (x + y)).epsilon(1e-13));
    CHECK(j.grad(1) == doctest::Approx(-0.5 * std::exp(x) * std::pow(y, -1.5) +
                                       1.0 / (x + y)).epsilon(1e-13));
    CHECK(j.hess(1, 1) == doctest::Approx(0.75 * std::exp(x) * std::pow(y, -2.5) -
                                          1.0 / ((x + y) * (x + y))).epsilon(1e-12));
}

TEST_CASE("jet respects variable count") {
    const std::vector<std::string> many = {"a", "b", "c", "d"};
    const ExprPtr e = parse_expr("a*d + b*c", many);
    const Jet2 j = eval_jet2(e, {1.0, 2.0, 3.0, 4.0}, many);
    CHECK(j.n == 4);
    CHECK(j.grad(0) == doctest::Approx(4.0));
    CHECK(j.grad(3) == doctest::Approx(1.0));
    CHECK(j.hess(0, 3) == doctest::Approx(1.0));
    CHECK(j.hess(1, 2) == doctest::Approx(1.0));
    CHECK(j.hess(0, 0) == doctest::Approx(0.0));
}

} // TEST_SUITE("units")

TEST_SUITE("properties") {

TEST_CASE("jets agree with finite differences on random expressions") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pdist(0.3, 1.7);
    const int nvars = 2;
    int done = 0;
    while (done < 300) {
        const ExprPtr e = testsup::random_expr(rng, nvars, 4);
        std::vector<double> at = {pdist(rng), pdist(rng)};
        Jet2 j;
        try {
            j = eval_jet2(e, at, xy);
        } catch (const ExprError&) {
            continue;
        }
        bool ok = std::isfinite(j.v) && std::abs(j.v) < 1e6;
        for (int i = 0; i < nvars && ok; ++i)
            ok = std::isfinite(j.grad(i)) && std::abs(j.grad(i)) < 1e6;
        for (int i = 0; i < nvars && ok; ++i)
            for (int l = 0; l < nvars && ok; ++l)
                ok = std::isfinite(j.hess(i, l)) && std::abs(j.hess(i, l)) < 1e6;
        if (!ok) continue;

        // keep the sample only when every probe can certify 1e-6
        bool fd_ok = true;
        double worst = 0.0;
        auto take = [&](double ad, const testsup::FdDeriv& fd) {
            const double scale = std::max({1.0, std::abs(ad), std::abs(fd.v)});
            if (!std::isfinite(fd.v) || std::abs(fd.v) > 1e6 || fd.err > 2e-7 * scale) {
                fd_ok = false;
                return;
            }
            worst = std::max(worst, testsup::rel(ad, fd.v));
        };
        for (int i = 0; i < nvars && fd_ok; ++i)
            take(j.grad(i), testsup::fd_grad(e, at, xy, i));
        for (int i = 0; i < nvars && fd_ok; ++i)
            for (int l = i; l < nvars && fd_ok; ++l)
                take(j.hess(i, l), testsup::fd_hess(e, at, xy, i, l));
        if (!fd_ok) continue;
        REQUIRE(worst <= 1e-6);
        ++done;
    }
}

} // TEST_SUITE("properties")

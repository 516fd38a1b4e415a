#include <doctest.h>

#include <cmath>
#include <random>

#include "psc/sparse.hpp"

using namespace psc;

namespace {

// 1d periodic -u'' + u on n nodes, unit spacing
CsrMatrix ring_operator(std::int64_t n) {
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(n);
    std::vector<std::vector<std::uint8_t>> prov(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto left = static_cast<std::int32_t>((i + n - 1) % n);
        const auto right = static_cast<std::int32_t>((i + 1) % n);
        rows[i] = {{static_cast<std::int32_t>(i), 2.0 + 1.0}, {left, -1.0}, {right, -1.0}};
        prov[i] = {kProvLaplacian | kProvPotential, kProvLaplacian, kProvLaplacian};
    }
    return csr_from_rows(n, rows, prov);
}

} // namespace

TEST_SUITE("units") {

TEST_CASE("csr assembly sorts columns and merges duplicates") {
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(2);
    std::vector<std::vector<std::uint8_t>> prov(2);
    rows[0] = {{1, 2.0}, {0, 1.0}, {1, 3.0}};
    prov[0] = {kProvLaplacian, kProvPotential, kProvDirectional};
    rows[1] = {{1, 4.0}};
    prov[1] = {kProvPotential};
    const CsrMatrix a = csr_from_rows(2, rows, prov);
    REQUIRE(a.nnz() == 3);
    CHECK(a.col[0] == 0);
    CHECK(a.col[1] == 1);
    CHECK(a.val[1] == doctest::Approx(5.0));
    CHECK(a.prov[1] == (kProvLaplacian | kProvDirectional));
    CHECK(a.val[2] == doctest::Approx(4.0));

    std::vector<double> x = {1.0, 10.0};
    std::vector<double> y;
    a.multiply(x, y);
    CHECK(y[0] == doctest::Approx(51.0));
    CHECK(y[1] == doctest::Approx(40.0));
}

TEST_CASE("pattern symmetry check") {
    const CsrMatrix ring = ring_operator(8);
    CHECK(ring.pattern_symmetric());

    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(2);
    std::vector<std::vector<std::uint8_t>> prov(2);
    rows[0] = {{0, 1.0}, {1, 1.0}};
    prov[0] = {kProvPotential, kProvPotential};
    rows[1] = {{1, 1.0}};
    prov[1] = {kProvPotential};
    CHECK_FALSE(csr_from_rows(2, rows, prov).pattern_symmetric());
}

TEST_CASE("dense and iterative solves agree") {
    const std::int64_t n = 64;
    const CsrMatrix a = ring_operator(n);
    std::vector<double> b(n);
    for (std::int64_t i = 0; i < n; ++i) b[i] = std::sin(2.0 * M_PI * i / n) + 0.3;

    std::vector<double> xd, xi;
    const SolveStats sd = dense_lu_solve(a, b, xd);
    const SolveStats si = bicgstab(a, b, xi, 1e-12, 500);
    CHECK(sd.converged);
    CHECK(si.converged);
    CHECK(sd.method == "dense-lu");
    CHECK(si.method == "bicgstab+ilu0");
    double worst = 0.0;
    for (std::int64_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(xd[i] - xi[i]));
    CHECK(worst <= 1e-9);

    std::vector<double> r;
    a.multiply(xd, r);
    for (std::int64_t i = 0; i < n; ++i) CHECK(r[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("solve_linear picks the method by size") {
    std::vector<double> b(10, 1.0), x;
    const SolveStats small = solve_linear(ring_operator(10), b, x, 1e-12, 100);
    CHECK(small.method == "dense-lu");

    std::vector<double> b2(3000, 1.0), x2;
    const SolveStats large = solve_linear(ring_operator(3000), b2, x2, 1e-12, 500);
    CHECK(large.method == "bicgstab+ilu0");
    CHECK(large.converged);
    // constant right side on the ring has the constant solution b/1
    for (double v : x2) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("ilu0 is exact on a triangular-friendly pattern") {
    // tridiagonal-with-wrap factors reproduce A z = r well enough that one
    // application already beats plain Jacobi by a wide margin
    const CsrMatrix a = ring_operator(32);
    Ilu0 f;
    f.build(a);
    std::vector<double> r(32, 1.0), z;
    f.apply(r, z);
    std::vector<double> az;
    a.multiply(z, az);
    double dev = 0.0;
    for (std::size_t i = 0; i < az.size(); ++i) dev = std::max(dev, std::abs(az[i] - 1.0));
    CHECK(dev < 0.5);
}

} // TEST_SUITE("units")

TEST_SUITE("properties") {

TEST_CASE("assembly is deterministic regardless of entry order") {
    std::mt19937_64 rng(123);
    const std::int64_t n = 40;
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(n);
    std::vector<std::vector<std::uint8_t>> prov(n);
    for (std::int64_t i = 0; i < n; ++i) {
        rows[i] = {{static_cast<std::int32_t>(i), 4.0},
                   {static_cast<std::int32_t>((i + 1) % n), -1.0},
                   {static_cast<std::int32_t>((i + n - 1) % n), -1.0},
                   {static_cast<std::int32_t>((i + 5) % n), 0.25}};
        prov[i] = {kProvPotential, kProvLaplacian, kProvLaplacian, kProvDirectional};
    }
    const CsrMatrix base = csr_from_rows(n, rows, prov);
    for (int trial = 0; trial < 5; ++trial) {
        auto rows2 = rows;
        auto prov2 = prov;
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::size_t j = rows2[i].size(); j > 1; --j) {
                const std::size_t pick = rng() % j;
                std::swap(rows2[i][pick], rows2[i][j - 1]);
                std::swap(prov2[i][pick], prov2[i][j - 1]);
            }
        }
        const CsrMatrix again = csr_from_rows(n, rows2, prov2);
        REQUIRE(again.nnz() == base.nnz());
        for (std::int64_t e = 0; e < base.nnz(); ++e) {
            CHECK(again.col[e] == base.col[e]);
            CHECK(again.val[e] == base.val[e]);
        }
    }
}

TEST_CASE("random diagonally dominant systems solve to tolerance") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::int64_t n = 30;
        std::vector<std::vector<std::pair<std::int32_t, double>>> rows(n);
        std::vector<std::vector<std::uint8_t>> prov(n);
        for (std::int64_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (int t = 0; t < 3; ++t) {
                const auto j = static_cast<std::int32_t>(rng() % n);
                if (j == i) continue;
                const double v = off(rng);
                rows[i].push_back({j, v});
                prov[i].push_back(kProvDirectional);
                row_sum += std::abs(v);
            }
            rows[i].push_back({static_cast<std::int32_t>(i), row_sum + 1.0});
            prov[i].push_back(kProvPotential);
        }
        const CsrMatrix a = csr_from_rows(n, rows, prov);
        std::vector<double> b(n);
        for (auto& v : b) v = off(rng);
        std::vector<double> x;
        const SolveStats st = solve_linear(a, b, x, 1e-12, 200);
        CHECK(st.converged);
        std::vector<double> r;
        a.multiply(x, r);
        double dev = 0.0;
        for (std::int64_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(r[i] - b[i]));
        CHECK(dev <= 1e-9);
    }
}

} // TEST_SUITE("properties")

#pragma once
// Compressed sparse row matrices and the solvers used for the discretized
// operator: ILU(0)-preconditioned BiCGStab with a dense LU fallback for
// small systems. All reductions are serial so reruns are bit-identical.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace psc {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// entry provenance bits, kept alongside the values for inspection
enum : std::uint8_t {
    kProvDirectional = 1,  // directional Hessian terms
    kProvLaplacian = 2,    // Laplace-Beltrami terms
    kProvPotential = 4,    // zeroth-order coefficient
};

struct CsrMatrix {
    std::int64_t n = 0;
    std::vector<std::int64_t> rowptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;
    std::vector<std::uint8_t> prov;

    std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    // true when the sparsity pattern is symmetric as a graph
    bool pattern_symmetric() const;
};

// Builds a CSR matrix from per-row coefficient lists; entries are sorted by
// column and duplicates are merged (values added, provenance bits or-ed).
CsrMatrix csr_from_rows(std::int64_t n,
                        const std::vector<std::vector<std::pair<std::int32_t, double>>>& rows,
                        const std::vector<std::vector<std::uint8_t>>& prov_rows);

struct Ilu0 {
    // factors stored in the matrix pattern
    std::vector<std::int64_t> rowptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;
    std::vector<std::int64_t> diag;

    void build(const CsrMatrix& a);
    void apply(const std::vector<double>& r, std::vector<double>& z) const;
};

struct SolveStats {
    bool converged = false;
    int iterations = 0;
    double rel_residual = 0.0;   // recomputed from the final iterate
    std::string method;
};

SolveStats bicgstab(const CsrMatrix& a, const std::vector<double>& b,
                    std::vector<double>& x, double tol, int max_iter);

// Dense LU with partial pivoting; only sensible for small n.
SolveStats dense_lu_solve(const CsrMatrix& a, const std::vector<double>& b,
                          std::vector<double>& x);

// Direct solve below the size threshold, preconditioned BiCGStab above it.
SolveStats solve_linear(const CsrMatrix& a, const std::vector<double>& b,
                        std::vector<double>& x, double tol, int max_iter,
                        std::int64_t dense_limit = 2048);

} // namespace psc

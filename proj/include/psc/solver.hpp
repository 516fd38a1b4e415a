#pragma once
// Discretization of the drift-diffusion operator
//   L u = sum_j c_j V_j^i V_j^j (Hess u)_ij + lap_coeff * Lap u + P u
// on fully periodic charts, smooth bump right sides supported near t = 0,
// the a-posteriori norms used by the acceptance gates, and spectral
// quantities of the conformal Laplacian.

#include "psc/geometry.hpp"
#include "psc/sparse.hpp"

namespace psc {

struct DiscreteOperator {
    CsrMatrix A;
    ScalarField potential;   // the zeroth-order coefficient per node
    int order = 2;
};

// Drift fields are given per node with components stacked fastest
// (field[f][node * dim + i]); their coefficients multiply the directional
// Hessians. Line axes are refused: the operator lives on closed charts.
DiscreteOperator assemble_operator(const MetricSpec& spec, const ChartGrid& grid,
                                   const std::vector<ScalarField>& drift_fields,
                                   const std::vector<double>& drift_coeffs,
                                   double lap_coeff, const ScalarField& potential,
                                   int order = 2);

struct BumpSpec {
    double amplitude = 0.0;  // plateau value
    double eps = 0.0;        // support half-width in t
    double t_period = 0.0;
    bool resolvable = true;  // eps covers at least four t spacings
};

// Smoothstep profile: 1 on |t| <= eps/2, 0 on |t| >= eps, C^infty between.
double bump_profile(double t, double eps, double period);

// F = amplitude * psi_eps(t) on the grid whose last axis is t.
ScalarField build_bump_rhs(const ChartGrid& grid, const BumpSpec& bump);

struct EpsilonChoice {
    double eps = 0.0;
    double budget = 0.0;       // L^p mass bound the support width must meet
    bool resolvable = true;    // eps >= 4 * t spacing
};

// Picks the largest eps (at most eps_max) whose quadrature L^p mass stays
// under delta, flagging when that width falls beneath the grid resolution.
EpsilonChoice choose_epsilon(const MetricSpec& w_spec, const ChartGrid& w_grid,
                             double amplitude, double delta, double p, double eps_max);

struct PdeSolution {
    ScalarField u;
    SolveStats stats;
};

PdeSolution solve_operator(const DiscreteOperator& op, const ScalarField& rhs,
                           double tol, int max_iter);

// Discrete Hoelder-type norm: sup |u| + max over axes of sup |D_axis u| +
// the alpha-quotient of u over node pairs within eight grid spacings. Pair
// sampling beyond 10^6 pairs is strided deterministically from the seed.
double norm_c1alpha(const ChartGrid& grid, const ScalarField& u, double alpha,
                    std::uint64_t seed = 0);

// sup of |d^2 u / dt^2| over nodes with circle distance |t| < eps/4 (t is
// the last axis). Throws if fewer than three t layers fall in the window.
double second_t_derivative_sup(const ChartGrid& grid, const ScalarField& u, double eps);

// Scale-invariant energy quotient of the conformal Laplacian at test
// function v (dimension taken from the spec).
double yamabe_quotient(const MetricSpec& spec, const ChartGrid& grid, const ScalarField& v);

struct SpectrumBound {
    double lambda_min = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Smallest eigenvalue of the conformal Laplacian by shifted inverse
// iteration (shift from the Gershgorin lower bound).
SpectrumBound spectrum_lower_bound(const MetricSpec& spec, const ChartGrid& grid,
                                   double tol = 1e-10, int max_iter = 200);

} // namespace psc

#pragma once
// Pointwise Riemannian data from metric expressions: the metric with two
// derivative orders, Christoffel symbols and their first derivatives,
// curvature tensors, and grid-level differential operators built on them.

#include <string>
#include <vector>

#include "psc/grid.hpp"
#include "psc/metric.hpp"

namespace psc {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace linalg {

// dense helpers on n x n matrices stored row-major in fixed capacity
using Mat = std::array<double, kMaxVars * kMaxVars>;
using Vec = std::array<double, kMaxVars>;

bool cholesky(const Mat& a, int n, Mat& lower);
void invert_spd(const Mat& a, int n, Mat& out, double& det);
bool invert(const Mat& a, int n, Mat& out, double& det);
// Jacobi rotations; fills eigenvalues ascending.
void sym_eigenvalues(const Mat& a, int n, Vec& evals);
// Symmetric positive square root via eigendecomposition.
void sym_sqrt(const Mat& a, int n, Mat& out);

} // namespace linalg

struct PointMetric {
    int d = 0;
    linalg::Mat g{};
    linalg::Mat ginv{};
    double det = 0.0;
    double sqrt_det = 0.0;
    // dg[k](i,j) = d_k g_ij ; d2g[k][l](i,j) = d_k d_l g_ij
    std::array<linalg::Mat, kMaxVars> dg{};
    std::array<std::array<linalg::Mat, kMaxVars>, kMaxVars> d2g{};

    double at(const linalg::Mat& m, int i, int j) const { return m[i * kMaxVars + j]; }
};

// Evaluates the metric and two derivative orders at a point; verifies
// symmetric positive definiteness (failure reports the smallest eigenvalue).
PointMetric metric_at(const MetricSpec& spec, const std::vector<double>& x);

struct Christoffel {
    int d = 0;
    // G[k](i,j) = Gamma^k_ij ; dG[m][k](i,j) = d_m Gamma^k_ij
    std::array<linalg::Mat, kMaxVars> G{};
    std::array<std::array<linalg::Mat, kMaxVars>, kMaxVars> dG{};
};

Christoffel christoffel(const PointMetric& pm);

struct CurvatureData {
    int d = 0;
    double scalar = 0.0;
    linalg::Mat ricci{};                      // R_ij
    std::vector<double> riemann;              // R^a_{bcd}, a*d^3+b*d^2+c*d+e layout
    double riem(int a, int b, int c, int e) const {
        return riemann[((a * d + b) * d + c) * d + e];
    }
};

CurvatureData curvature_at(const MetricSpec& spec, const std::vector<double>& x);

// Gaussian curvature of a 2d metric by the Brioschi formula (first
// fundamental form and its derivatives only).
double brioschi_K(const MetricSpec& spec, const std::vector<double>& x);

// Sectional-style consistency value for 2d: scalar curvature is 2K.
ScalarField scalar_curvature_field(const MetricSpec& spec, const ChartGrid& grid);

// Laplace-Beltrami by AD-exact metric coefficients and stencil derivatives.
ScalarField laplace_beltrami(const MetricSpec& spec, const ChartGrid& grid,
                             const ScalarField& u, int order = 2);

// V^i V^j (d2_ij u - Gamma^k_ij d_k u) for a vector field V given per node
// (components stacked fastest: v[node*dim + i]).
ScalarField covariant_hessian_VV(const MetricSpec& spec, const ChartGrid& grid,
                                 const ScalarField& u, const std::vector<double>& V,
                                 int order = 2);

double integrate(const MetricSpec& spec, const ChartGrid& grid, const ScalarField& f);
double lp_norm(const MetricSpec& spec, const ChartGrid& grid, const ScalarField& f, double p);
double volume(const MetricSpec& spec, const ChartGrid& grid);

// CSV dump of curvature quantities over a grid (one row per node:
// coordinates, scalar curvature, and for 2d charts the Gaussian K).
std::string curvature_csv(const MetricSpec& spec, const ChartGrid& grid);

} // namespace psc

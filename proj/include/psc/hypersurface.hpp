#pragma once
// Coordinate-slice hypersurfaces: induced metrics by expression
// substitution, raised-conormal unit normals, projected normals with
// their tangential decompositions, and extrinsic curvature data.

#include "psc/geometry.hpp"

namespace psc {

// Restricts to the hypersurface {coord = value}: substitutes the value in
// every component and drops the coordinate. Adjusts the x_dim/k split and
// polar azimuth indices.
MetricSpec induced_metric(const MetricSpec& spec, int coord, double value);

struct NormalData {
    std::vector<double> nu;                 // contravariant components
    std::vector<std::vector<double>> dnu;   // dnu[i][j] = d_i nu^j
    double unit_check = 0.0;                // g(nu, nu)
};

// Unit normal of {coord = x[coord]} through x, oriented so g(nu, d_coord) > 0.
NormalData unit_normal(const MetricSpec& spec, int coord, const std::vector<double>& x);

struct ExtrinsicData {
    std::vector<double> nu;
    linalg::Mat A{};        // second fundamental form on tangential indices
    double h = 0.0;         // mean curvature (trace of the shape operator)
    double normA2 = 0.0;    // |A|^2 in the induced metric
    double ric_nn = 0.0;    // ambient Ricci on the normal
};

ExtrinsicData second_fundamental_form(const MetricSpec& spec, int coord,
                                      const std::vector<double>& x);

struct ProjectedNormal {
    // decomposition of the normal pushed down to the X x R_1 block:
    // mu = a * d_zeta + V, with V tangent to X
    double a = 0.0;
    std::vector<double> V;       // x_dim components
    double norm2 = 0.0;          // squared length of mu in the target metric
    bool degenerate = false;     // mu vanishes (below 1e-12 componentwise)
};

// The slice tower of an X x R^k ambient at a base point on X x {0}^k.
// Stage j (j = k..1) slices {r_j = 0} inside the ambient already restricted
// to X x R_1 x ... x R_j.
struct SliceTower {
    std::vector<MetricSpec> levels;      // levels[j] = metric on X x R_1..R_j (j = 0..k)
    std::vector<ExtrinsicData> extrinsic;// stage data, index 0 = outermost slice (r_k)
    std::vector<ProjectedNormal> proj;   // projections of each stage normal, same order
    int n = 0;                           // x_dim + 1
    int k = 0;
};

SliceTower slice_tower(const MetricSpec& ambient, const std::vector<double>& x_point);

// Twice-contracted Gauss identity residual across the full tower at a point
// of X (k = 2 ambients): the intrinsic scalar curvature of X against the
// ambient curvature corrected by the stage extrinsic data.
double gauss_codazzi_residual(const MetricSpec& ambient, const std::vector<double>& x_point);

// Per-node slice diagnostics over an X grid: normals, mean curvature,
// |A|^2, Ricci on the normal for every stage, plus the residual.
std::string slice_geometry_csv(const MetricSpec& ambient, const ChartGrid& x_grid);

} // namespace psc

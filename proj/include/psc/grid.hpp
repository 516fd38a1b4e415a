#pragma once
// Structured grids over chart products. Periodic directions wrap, polar
// directions use offset nodes theta_j = (j+1/2) dtheta and reflect through
// the poles with a half-turn of the azimuth, line directions are truncated
// closed intervals (diagnostics only; one-sided stencils at the ends).

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "psc/metric.hpp"

namespace psc {

struct GridAxis {
    int n = 0;          // node count
    double x0 = 0.0;    // first node (polar: h/2 offset is implicit)
    double h = 0.0;     // spacing
    TopKind kind = TopKind::Periodic;
    int azimuth = -1;   // polar: paired axis index
};

struct ChartGrid {
    std::vector<GridAxis> axes;
    std::vector<int64_t> strides;
    int64_t total = 0;

    int ndim() const { return static_cast<int>(axes.size()); }

    static ChartGrid make(const MetricSpec& spec, const std::vector<int>& counts,
                          const std::vector<std::pair<double, double>>& line_extents = {});

    int64_t index(const std::vector<int>& idx) const;
    void unravel(int64_t flat, std::vector<int>& idx) const;
    double coord(int axis, int i) const;
    void point(const std::vector<int>& idx, std::vector<double>& x) const;
    std::vector<double> point(int64_t flat) const;

    // Flat index of the node `off` steps along `axis` from `idx`, applying
    // the wrap rules. Valid for scalar fields. Throws when a line axis runs
    // off the end.
    int64_t neighbor(const std::vector<int>& idx, int axis, int off) const;
    int64_t neighbor(int64_t flat, int axis, int off) const;

    // Quadrature weight of the node (no metric factor), midpoint weights on
    // periodic/polar axes, trapezoid on line axes.
    double cell_weight(const std::vector<int>& idx) const;
};

using ScalarField = std::vector<double>;

// Central first derivative along an axis, second order (or fourth with
// order=4). Line axes fall back to one-sided differences at the ends.
double diff1(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
             int axis, int order = 2);
// Central second derivative along one axis.
double diff2(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
             int axis, int order = 2);
// Mixed second derivative via nested first differences.
double diff2_mixed(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
                   int axis_a, int axis_b, int order = 2);

} // namespace psc

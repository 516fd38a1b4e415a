#pragma once
// Metric descriptions on X x R^k, where X is a closed manifold given by
// periodic and sphere-polar chart directions and the R factors are line
// directions. Component entries are closed-form expressions of the
// coordinates; parameters are inlined before parsing.

#include <optional>
#include <string>
#include <vector>

#include "psc/expr.hpp"

namespace psc {

enum class TopKind { Periodic, Line, PolarTheta };

struct Topology {
    TopKind kind = TopKind::Periodic;
    double period = 0.0;  // Periodic: full period; PolarTheta: extent is pi
    int azimuth = -1;     // PolarTheta: index of the paired periodic coord
};

struct MetricSpec {
    std::vector<std::string> coords;
    std::vector<Topology> topology;
    // symmetric storage, row-major upper triangle included; comp[i][j] == comp[j][i]
    std::vector<std::vector<ExprPtr>> comp;
    int x_dim = 0;  // leading closed-manifold directions
    int k = 0;      // trailing line directions (flat factors being sliced)

    int dim() const { return static_cast<int>(coords.size()); }
    // n is the dimension of X x R^1, the space where the angle condition lives
    int n() const { return x_dim + 1; }

    const ExprPtr& at(int i, int j) const { return comp[i][j]; }

    bool has_expr_dependence(int var) const;
};

struct MetricSpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses the fixed-shape JSON config {"coords", "topology", "params",
// "components"}. Line directions must trail the closed directions; the
// split into x_dim and k is inferred from the topology.
MetricSpec parse_metric_spec(const std::string& json_text);

// Serializes back to the config shape (components printed from the ASTs).
std::string metric_spec_to_json(const MetricSpec& spec);

// e^{2 phi} g at expression level; phi is parsed against the same coords.
MetricSpec conformal_rescale(const MetricSpec& spec, const ExprPtr& phi);

// Appends a circle direction "t" (period 2 pi, g_tt = 1). Used to build
// W = X x S^1 style ambients.
MetricSpec with_circle(const MetricSpec& spec, double period = 6.283185307179586);

} // namespace psc

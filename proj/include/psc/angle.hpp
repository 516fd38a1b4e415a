#pragma once
// The conformally invariant angle condition between stage normals and the
// first line direction, plus the ellipticity certificate for the operator
// built from the same projected normals.

#include "psc/hypersurface.hpp"

namespace psc {

enum class Verdict { Pass, Fail, Indeterminate };

const char* verdict_name(Verdict v);

struct AngleTerms {
    // one entry per slice stage j = k..2 plus the final normal term
    std::vector<double> A;        // coefficient-weighted secant-squared terms
    std::vector<double> B;        // matching thresholds on the right side
    std::vector<bool> degenerate; // stage projection vanished
    double lhs = 0.0;
    double rhs = 0.0;
    bool all_degenerate = false;  // every stage projection vanished
    bool mixed = false;           // some but not all stages degenerate
};

// Evaluates the condition at one X point. Degenerate stages drop their A
// term and remove the matching B from the threshold; if every stage is
// degenerate the condition reduces to the final-normal term against 2.
AngleTerms angle_terms(const MetricSpec& ambient, const std::vector<double>& x_point);

struct AngleNodeResult {
    std::int64_t node = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool degenerate_branch = false;
};

struct AngleReport {
    Verdict verdict = Verdict::Indeterminate;
    double max_lhs = 0.0;
    double min_margin = 0.0;   // min over nodes of rhs - lhs
    std::int64_t worst_node = 0;
    std::vector<double> worst_point;
    bool degenerate_branch = false;  // the uniform branch that applied
    bool mixed_degeneracy = false;   // degeneracy differed across nodes or stages
    std::vector<AngleNodeResult> nodes;  // filled when keep_nodes
};

AngleReport check_angle_condition(const MetricSpec& ambient, const ChartGrid& x_grid,
                                  bool keep_nodes = false);

// max over sample points of |lhs(g) - lhs(e^{2 phi} g)|
double conformal_invariance_gap(const MetricSpec& ambient, const ExprPtr& phi,
                                const ChartGrid& x_grid);

struct EllipticityNode {
    double q = 0.0;            // weighted squared lengths of the drift fields
    double min_eig = 0.0;      // smallest symbol eigenvalue
};

struct EllipticityCertificate {
    bool elliptic = false;     // min over nodes of min_eig > 0
    double q_max = 0.0;
    double min_eig = 0.0;
    std::int64_t worst_node = 0;
    std::vector<EllipticityNode> nodes;  // filled when keep_nodes
};

// Certifies the principal symbol I - sum_j c_j W_j W_j^T (W_j the metric
// square-root weighted drift fields) is positive definite across the grid.
EllipticityCertificate ellipticity_certificate(const MetricSpec& ambient,
                                               const ChartGrid& x_grid,
                                               bool keep_nodes = false);

struct SylvesterMinors {
    std::vector<double> direct;     // det of each leading principal minor
    std::vector<double> eigenform;  // C2^{k-1} (C2 - |b|^2)
    std::vector<double> scaled;     // C2^k (C2 - |b|^2), the commonly quoted form
};

// Leading principal minors of C2 I - b b^T three ways; `direct` and
// `eigenform` agree, `scaled` carries an extra factor of C2.
SylvesterMinors sylvester_minors(const std::vector<double>& b, double C2);

} // namespace psc

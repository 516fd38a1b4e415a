#pragma once
// Conformal transformation of scalar curvature, the deformation pipeline on
// W = X x S^1 (solve, gates, conformal factor, sliced curvature verdict),
// and the near-slice identity crosscheck between the directly computed
// transformed curvature and its assembled right side.

#include "psc/angle.hpp"
#include "psc/solver.hpp"

namespace psc {

struct ConformalLaw {
    double direct = 0.0;   // curvature of the rescaled metric expressions
    double formula = 0.0;  // transformation law evaluated with AD derivatives
};

ConformalLaw conformal_scalar_law(const MetricSpec& spec, const ExprPtr& phi,
                                  const std::vector<double>& x);

struct CConstant {
    double value = 0.0;
    double extrinsic_max = 0.0;  // max over X of the stagewise curvature sum
};

// 2 * extrinsic_max + 3 + margin
CConstant compute_C_constant(const MetricSpec& ambient, const ChartGrid& x_grid,
                             double margin = 1.0);

struct HermitianCheck {
    bool applicable = false;     // even-dimensional closed factor
    double j_squared_dev = 0.0;  // |J^2 + I|
    double base_dev = 0.0;       // |g(J.,J.) - g| over the grid
    double rescaled_dev = 0.0;   // same under e^{2 phi} g
};

// Compatibility of the closed-factor block with the standard block rotation
// on coordinate pairs, before and after a conformal rescale.
HermitianCheck hermitian_compatibility(const MetricSpec& ambient, const ChartGrid& x_grid,
                                       const ExprPtr& phi);

struct PipelineConfig {
    std::vector<int> x_counts;    // closed-factor grid (empty: 64 per axis)
    int t_count = 32;
    double eta = 0.05;            // C^{1,alpha} gate
    double eta_prime = 0.05;      // second t derivative gate
    double alpha = 0.5;
    double p = 0.0;               // 0 picks n + 1
    double delta = 0.0;           // > 0 starts from the mass-driven epsilon
    double kappa0 = 0.0;          // uniform positivity floor for R
    double tol = 1e-10;
    int max_iter = 20000;
    int retries = 4;
    double margin = 1.0;          // added to the C constant
    int order = 2;
    std::uint64_t seed = 0;
    bool force = false;           // assemble despite a failed certificate
};

struct GateReport {
    double c1alpha = 0.0;
    bool c1alpha_ok = false;
    double d2t = 0.0;
    bool d2t_ok = false;
    bool d2t_measured = false;   // enough t layers inside the window
    double uw_min = 0.0, uw_max = 0.0;
    bool uw_ok = false;
    double quotient_max = 0.0;   // first-order quotient on the slice
    bool quotient_ok = false;
    double a1_max = 0.0;         // Laplacian comparison correction (recorded)
    bool a1_ok = false;

    bool pass() const { return c1alpha_ok && d2t_ok && uw_ok && quotient_ok; }
};

enum class PipelineVerdict { Success, AngleFail, GateFail, SolverFail, HypothesisFail };

const char* pipeline_verdict_name(PipelineVerdict v);

struct PipelineAttempt {
    double eps = 0.0;
    GateReport gates;
    SolveStats stats;
    double rtilde_min = 0.0, rtilde_max = 0.0;
    double crosscheck_dev = 0.0;    // |direct - assembled| max over X
    double crosscheck_scale = 0.0;  // max |direct|
    std::string note;
};

struct PipelineReport {
    PipelineVerdict verdict = PipelineVerdict::SolverFail;
    std::string reason;
    AngleReport angle;
    EllipticityCertificate cert;
    double C = 0.0;
    double rbar_min = 0.0;
    double kappa0 = 0.0;
    std::vector<PipelineAttempt> attempts;
    ScalarField u;        // final solution on the W grid
    ScalarField rtilde;   // transformed scalar curvature on the X grid
    MetricSpec x_spec;
    MetricSpec w_spec;
};

// The closed factor alone: every line direction sliced away at 0.
MetricSpec restrict_to_x(const MetricSpec& ambient);

PipelineReport run_pipeline(const MetricSpec& ambient, const PipelineConfig& cfg);

// The discretized operator of the deformation equation on W = X x S^1:
// stage drift fields broadcast along t, Laplacian coefficient -4, potential
// the ambient scalar curvature on the slice.
struct WOperator {
    MetricSpec x_spec;
    MetricSpec w_spec;
    ChartGrid x_grid;
    ChartGrid w_grid;
    DiscreteOperator op;
    ScalarField rbar;        // potential per W node
    double rbar_min = 0.0;
};

WOperator build_w_operator(const MetricSpec& ambient, std::vector<int> x_counts,
                           int t_count, int order = 2);

struct Crosscheck {
    double max_dev = 0.0;
    double max_direct = 0.0;
    double a1_max = 0.0;
};

// Evaluates both sides of the sliced-curvature identity for a given W field
// u and right side F (u_W = u + 1). The assembled side substitutes the PDE,
// the Laplacian comparison corrections, and the second t derivative.
Crosscheck crosscheck_conformal_identity(const MetricSpec& ambient, const ChartGrid& x_grid,
                                         const ChartGrid& w_grid, const ScalarField& u,
                                         const ScalarField& F, int order = 2);

} // namespace psc

// Python bindings for the core operations: spec construction, curvature,
// slice geometry, angle condition, ellipticity, conformal law, the solver,
// and the deformation pipeline.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psc/angle.hpp"
#include "psc/conformal.hpp"
#include "psc/geometry.hpp"
#include "psc/grid.hpp"
#include "psc/hypersurface.hpp"
#include "psc/metric.hpp"
#include "psc/registry.hpp"
#include "psc/solver.hpp"

namespace py = pybind11;
using namespace psc;

namespace {

ChartGrid x_grid_for(const MetricSpec& ambient, std::vector<int> counts) {
    const MetricSpec xs = restrict_to_x(ambient);
    if (counts.empty()) counts.assign(xs.dim(), 16);
    return ChartGrid::make(xs, counts);
}

py::dict angle_dict(const AngleReport& rep) {
    py::dict d;
    d["verdict"] = verdict_name(rep.verdict);
    d["max_lhs"] = rep.max_lhs;
    d["min_margin"] = rep.min_margin;
    d["worst_node"] = rep.worst_node;
    d["worst_point"] = rep.worst_point;
    d["degenerate_branch"] = rep.degenerate_branch;
    d["mixed_degeneracy"] = rep.mixed_degeneracy;
    return d;
}

py::dict cert_dict(const EllipticityCertificate& cert) {
    py::dict d;
    d["elliptic"] = cert.elliptic;
    d["q_max"] = cert.q_max;
    d["min_eig"] = cert.min_eig;
    d["worst_node"] = cert.worst_node;
    return d;
}

py::dict gates_dict(const GateReport& g) {
    py::dict d;
    d["c1alpha"] = g.c1alpha;
    d["c1alpha_ok"] = g.c1alpha_ok;
    d["d2t"] = g.d2t;
    d["d2t_measured"] = g.d2t_measured;
    d["d2t_ok"] = g.d2t_ok;
    d["uw_min"] = g.uw_min;
    d["uw_max"] = g.uw_max;
    d["uw_ok"] = g.uw_ok;
    d["quotient_max"] = g.quotient_max;
    d["quotient_ok"] = g.quotient_ok;
    d["a1_max"] = g.a1_max;
    d["pass"] = g.pass();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "curvature, slice geometry, angle conditions, and the conformal "
              "deformation pipeline for product metrics";

    py::register_exception<MetricSpecError>(m, "MetricSpecError", PyExc_ValueError);
    py::register_exception<ExprError>(m, "ExprError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<MetricSpec>(m, "Spec")
        .def_property_readonly("coords", [](const MetricSpec& s) { return s.coords; })
        .def_property_readonly("dim", &MetricSpec::dim)
        .def_property_readonly("n", &MetricSpec::n)
        .def_readonly("x_dim", &MetricSpec::x_dim)
        .def_readonly("k", &MetricSpec::k)
        .def("to_json", &metric_spec_to_json)
        .def("__repr__", [](const MetricSpec& s) {
            std::string r = "Spec(";
            for (size_t i = 0; i < s.coords.size(); ++i) {
                if (i) r += ",";
                r += s.coords[i];
            }
            return r + ")";
        });

    m.def("spec_from_json", &parse_metric_spec, py::arg("json_text"),
          "Parse a metric spec from its JSON description");
    m.def(
        "registry",
        [] {
            py::list out;
            for (const auto& e : registry_entries()) {
                py::dict d;
                d["name"] = e.name;
                d["summary"] = e.summary;
                d["defaults"] = e.defaults;
                out.append(d);
            }
            return out;
        },
        "Named metric families with their default parameters");
    m.def("registry_spec", &registry_spec, py::arg("name"),
          py::arg("params") = std::map<std::string, double>{},
          "Instantiate a registry family");
    m.def("with_circle", &with_circle, py::arg("spec"),
          py::arg("period") = 6.283185307179586);
    m.def("restrict_to_x", &restrict_to_x, py::arg("spec"),
          "The closed factor with every line direction sliced away at 0");

    m.def(
        "scalar_curvature",
        [](const MetricSpec& s, const std::vector<double>& x) {
            return curvature_at(s, x).scalar;
        },
        py::arg("spec"), py::arg("x"));
    m.def("gaussian_curvature", &brioschi_K, py::arg("spec"), py::arg("x"));
    m.def("gauss_codazzi_residual", &gauss_codazzi_residual, py::arg("spec"),
          py::arg("x"));

    m.def(
        "angle_terms",
        [](const MetricSpec& s, const std::vector<double>& x) {
            const AngleTerms t = angle_terms(s, x);
            py::dict d;
            d["lhs"] = t.lhs;
            d["rhs"] = t.rhs;
            d["A"] = t.A;
            d["B"] = t.B;
            d["all_degenerate"] = t.all_degenerate;
            d["mixed"] = t.mixed;
            return d;
        },
        py::arg("spec"), py::arg("x"));
    m.def(
        "angle_check",
        [](const MetricSpec& s, std::vector<int> counts) {
            return angle_dict(check_angle_condition(s, x_grid_for(s, std::move(counts))));
        },
        py::arg("spec"), py::arg("counts") = std::vector<int>{});
    m.def(
        "ellipticity",
        [](const MetricSpec& s, std::vector<int> counts) {
            return cert_dict(ellipticity_certificate(s, x_grid_for(s, std::move(counts))));
        },
        py::arg("spec"), py::arg("counts") = std::vector<int>{});

    m.def(
        "conformal_law",
        [](const MetricSpec& s, const std::string& phi, const std::vector<double>& x) {
            const ConformalLaw law = conformal_scalar_law(s, parse_expr(phi, s.coords), x);
            py::dict d;
            d["direct"] = law.direct;
            d["formula"] = law.formula;
            return d;
        },
        py::arg("spec"), py::arg("phi"), py::arg("x"));

    m.def(
        "solve_pde",
        [](const MetricSpec& s, std::vector<int> x_counts, int t, double eps, double tol,
           int max_iter, int order, double margin) {
            const WOperator wo = build_w_operator(s, std::move(x_counts), t, order);
            const CConstant cc = compute_C_constant(s, wo.x_grid, margin);
            const double ht = wo.w_grid.axes[s.x_dim].h;
            const double period = ht * wo.w_grid.axes[s.x_dim].n;
            if (eps <= 0.0) eps = period / 4.0;
            const BumpSpec bump{cc.value + 1.0, eps, period, eps >= 4.0 * ht};
            const ScalarField rhs = build_bump_rhs(wo.w_grid, bump);
            const PdeSolution sol = solve_operator(wo.op, rhs, tol, max_iter);
            double umin = sol.u[0], umax = sol.u[0];
            for (double v : sol.u) {
                umin = std::min(umin, v);
                umax = std::max(umax, v);
            }
            py::dict d;
            d["converged"] = sol.stats.converged;
            d["iterations"] = sol.stats.iterations;
            d["rel_residual"] = sol.stats.rel_residual;
            d["method"] = sol.stats.method;
            d["C"] = cc.value;
            d["eps"] = eps;
            d["u_min"] = umin;
            d["u_max"] = umax;
            d["u"] = sol.u;
            return d;
        },
        py::arg("spec"), py::arg("x_counts") = std::vector<int>{}, py::arg("t") = 32,
        py::arg("eps") = 0.0, py::arg("tol") = 1e-10, py::arg("max_iter") = 20000,
        py::arg("order") = 2, py::arg("margin") = 1.0);

    m.def(
        "pipeline",
        [](const MetricSpec& s, std::vector<int> x_counts, int t, double kappa0,
           double eta, double eta_prime, double alpha, double p, double delta, double tol,
           int max_iter, int retries, double margin, int order, std::uint64_t seed,
           bool force, bool return_fields) {
            PipelineConfig cfg;
            cfg.x_counts = std::move(x_counts);
            cfg.t_count = t;
            cfg.kappa0 = kappa0;
            cfg.eta = eta;
            cfg.eta_prime = eta_prime;
            cfg.alpha = alpha;
            cfg.p = p;
            cfg.delta = delta;
            cfg.tol = tol;
            cfg.max_iter = max_iter;
            cfg.retries = retries;
            cfg.margin = margin;
            cfg.order = order;
            cfg.seed = seed;
            cfg.force = force;
            const PipelineReport rep = run_pipeline(s, cfg);
            py::dict d;
            d["verdict"] = pipeline_verdict_name(rep.verdict);
            d["reason"] = rep.reason;
            d["angle"] = angle_dict(rep.angle);
            d["cert"] = cert_dict(rep.cert);
            d["C"] = rep.C;
            d["rbar_min"] = rep.rbar_min;
            d["kappa0"] = rep.kappa0;
            py::list attempts;
            for (const auto& at : rep.attempts) {
                py::dict a;
                a["eps"] = at.eps;
                a["converged"] = at.stats.converged;
                a["iterations"] = at.stats.iterations;
                a["gates"] = gates_dict(at.gates);
                a["rtilde_min"] = at.rtilde_min;
                a["rtilde_max"] = at.rtilde_max;
                a["crosscheck_dev"] = at.crosscheck_dev;
                a["crosscheck_scale"] = at.crosscheck_scale;
                a["note"] = at.note;
                attempts.append(a);
            }
            d["attempts"] = attempts;
            if (return_fields) {
                d["u"] = rep.u;
                d["rtilde"] = rep.rtilde;
            }
            return d;
        },
        py::arg("spec"), py::arg("x_counts") = std::vector<int>{}, py::arg("t") = 32,
        py::arg("kappa0") = 0.0, py::arg("eta") = 0.05, py::arg("eta_prime") = 0.05,
        py::arg("alpha") = 0.5, py::arg("p") = 0.0, py::arg("delta") = 0.0,
        py::arg("tol") = 1e-10, py::arg("max_iter") = 20000, py::arg("retries") = 4,
        py::arg("margin") = 1.0, py::arg("order") = 2, py::arg("seed") = 0,
        py::arg("force") = false, py::arg("return_fields") = false);

    m.def(
        "yamabe",
        [](const MetricSpec& s, std::vector<int> counts, double tol) {
            if (s.k != 0)
                throw MetricSpecError("yamabe needs a closed spec (no line directions)");
            if (counts.empty()) counts.assign(s.dim(), 16);
            const ChartGrid grid = ChartGrid::make(s, counts);
            const ScalarField ones(grid.total, 1.0);
            const SpectrumBound sb = spectrum_lower_bound(s, grid, tol);
            py::dict d;
            d["energy_at_one"] = yamabe_quotient(s, grid, ones);
            d["lambda_min"] = sb.lambda_min;
            d["iterations"] = sb.iterations;
            d["converged"] = sb.converged;
            return d;
        },
        py::arg("spec"), py::arg("counts") = std::vector<int>{}, py::arg("tol") = 1e-10);
}

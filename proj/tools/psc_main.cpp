// Command-line front end: spec ingestion (registry families or JSON files),
// subcommand dispatch, JSON reports on stdout, CSV artifacts under --out.
//
// Exit codes: 0 success, 1 usage, 2 solver failure, 3 failed gate or angle
// condition, 4 bad input.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "psc/angle.hpp"
#include "psc/conformal.hpp"
#include "psc/geometry.hpp"
#include "psc/grid.hpp"
#include "psc/hypersurface.hpp"
#include "psc/metric.hpp"
#include "psc/registry.hpp"
#include "psc/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace psc;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string spec;
    std::string x_family;
    std::vector<std::string> params;
    std::string grid;
    std::string config;
    std::string out = ".";
    int n = 0;
    int k = 0;
    int t_count = 32;
    double kappa0 = 0.0;
    double eta = 0.05;
    double eta_prime = 0.05;
    double alpha = 0.5;
    double p = 0.0;
    double delta = 0.0;
    double tol = 1e-10;
    int max_iter = 20000;
    int retries = 4;
    std::uint64_t seed = 0;
    int order = 2;
    bool force = false;
    double extent = 3.0;
    double eps = 0.0;
    double margin = 1.0;
};

std::vector<int> parse_grid(const std::string& s) {
    std::vector<int> out;
    if (s.empty()) return out;
    std::string cur;
    for (char c : s + "x") {
        if (c == 'x' || c == 'X' || c == ',') {
            try {
                size_t used = 0;
                const int v = std::stoi(cur, &used);
                if (used != cur.size()) throw std::invalid_argument(cur);
                out.push_back(v);
            } catch (const std::exception&) {
                throw UsageError("--grid expects counts like 64x64x32, got '" + s + "'");
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        const auto pos = kv.find('=');
        if (pos == std::string::npos || pos == 0)
            throw UsageError("--param expects name=value, got '" + kv + "'");
        try {
            size_t used = 0;
            out[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1), &used);
            if (used != kv.size() - pos - 1) throw std::invalid_argument(kv);
        } catch (const std::exception&) {
            throw UsageError("--param value in '" + kv + "' is not a number");
        }
    }
    return out;
}

MetricSpec load_spec(const Options& o) {
    if (o.spec.empty())
        throw UsageError("--spec is required (path to a JSON file or a registry family)");
    if (!o.x_family.empty() && o.spec != "product")
        throw UsageError("--x only applies together with --spec product");
    auto params = parse_params(o.params);
    if (fs::exists(o.spec)) {
        if (o.n > 0 || o.k > 0)
            throw UsageError("--n and --k adjust registry families, not spec files");
        std::ifstream in(o.spec);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw MetricSpecError("spec file '" + o.spec + "' is not valid JSON: " + e.what());
        }
        for (const auto& [key, val] : params) j["params"][key] = val;
        return parse_metric_spec(j.dump());
    }
    std::string name = o.spec;
    if (name == "product" && !o.x_family.empty()) name = o.x_family;
    if (o.n > 0) params["dim"] = o.n - 1.0;
    if (o.k > 0) params["k"] = o.k;
    return registry_spec(name, params);
}

// counts aligned with the spec axes (plus one trailing circle count when
// with_t); closed directions need enough nodes for the stencils
void check_counts(const MetricSpec& spec, const std::vector<int>& counts, bool with_t) {
    for (int i = 0; i < spec.dim(); ++i)
        if (spec.topology[i].kind != TopKind::Line && counts[i] < 8)
            throw UsageError("closed direction '" + spec.coords[i] + "' needs at least 8 nodes");
    if (with_t && counts.back() < 8)
        throw UsageError("the circle direction needs at least 8 nodes");
}

std::vector<int> full_grid_counts(const MetricSpec& spec, const std::string& flag) {
    std::vector<int> counts = parse_grid(flag);
    if (counts.empty())
        for (int i = 0; i < spec.dim(); ++i)
            counts.push_back(spec.topology[i].kind == TopKind::Line ? 9 : 16);
    if (static_cast<int>(counts.size()) != spec.dim())
        throw UsageError("--grid needs one count per coordinate (" +
                         std::to_string(spec.dim()) + ")");
    check_counts(spec, counts, false);
    return counts;
}

std::vector<int> x_grid_counts(const MetricSpec& ambient, const std::string& flag, int dflt) {
    std::vector<int> counts = parse_grid(flag);
    if (counts.empty()) counts.assign(ambient.x_dim, dflt);
    if (static_cast<int>(counts.size()) != ambient.x_dim)
        throw UsageError("--grid needs one count per closed direction (" +
                         std::to_string(ambient.x_dim) + ")");
    MetricSpec xs = restrict_to_x(ambient);
    check_counts(xs, counts, false);
    return counts;
}

// x counts plus the circle count; --grid may carry the circle as an extra
// trailing entry, otherwise t_flag supplies it
std::pair<std::vector<int>, int> w_grid_counts(const MetricSpec& ambient,
                                               const std::string& flag, int t_flag) {
    std::vector<int> counts = parse_grid(flag);
    int t = t_flag;
    if (counts.empty()) counts.assign(ambient.x_dim, 64);
    if (static_cast<int>(counts.size()) == ambient.x_dim + 1) {
        t = counts.back();
        counts.pop_back();
    }
    if (static_cast<int>(counts.size()) != ambient.x_dim)
        throw UsageError("--grid needs counts for the closed directions, optionally "
                         "followed by the circle count");
    MetricSpec xs = restrict_to_x(ambient);
    check_counts(xs, counts, false);
    if (t < 8) throw UsageError("the circle direction needs at least 8 nodes");
    return {counts, t};
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string field_csv(const ChartGrid& grid, const std::vector<std::string>& coords,
                      const std::vector<std::pair<std::string, const ScalarField*>>& cols) {
    std::string out;
    for (const auto& c : coords) {
        out += c;
        out += ',';
    }
    for (size_t i = 0; i < cols.size(); ++i) {
        out += cols[i].first;
        out += i + 1 < cols.size() ? ',' : '\n';
    }
    for (std::int64_t f = 0; f < grid.total; ++f) {
        const std::vector<double> x = grid.point(f);
        for (double xi : x) {
            out += num(xi);
            out += ',';
        }
        for (size_t i = 0; i < cols.size(); ++i) {
            out += num((*cols[i].second)[f]);
            out += i + 1 < cols.size() ? ',' : '\n';
        }
    }
    return out;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

ordered_json spec_json(const MetricSpec& spec) {
    return ordered_json::parse(metric_spec_to_json(spec));
}

void emit(const Options& o, const std::string& json_name, const ordered_json& report) {
    fs::create_directories(o.out);
    const std::string text = report.dump(2) + "\n";
    write_file(fs::path(o.out) / json_name, text);
    std::fputs(text.c_str(), stdout);
}

ordered_json angle_json(const AngleReport& rep) {
    ordered_json a;
    a["verdict"] = verdict_name(rep.verdict);
    a["max_lhs"] = rep.max_lhs;
    a["min_margin"] = rep.min_margin;
    a["worst_node"] = rep.worst_node;
    a["worst_point"] = rep.worst_point;
    a["degenerate_branch"] = rep.degenerate_branch;
    a["mixed_degeneracy"] = rep.mixed_degeneracy;
    return a;
}

ordered_json cert_json(const EllipticityCertificate& cert) {
    ordered_json c;
    c["elliptic"] = cert.elliptic;
    c["q_max"] = cert.q_max;
    c["min_eig"] = cert.min_eig;
    c["worst_node"] = cert.worst_node;
    return c;
}

int run_curvature(const Options& o) {
    const MetricSpec spec = load_spec(o);
    const std::vector<int> counts = full_grid_counts(spec, o.grid);
    std::vector<std::pair<double, double>> extents(spec.k, {-o.extent, o.extent});
    const ChartGrid grid = ChartGrid::make(spec, counts, extents);

    double rmin = 0.0, rmax = 0.0, kmin = 0.0, kmax = 0.0;
    for (std::int64_t f = 0; f < grid.total; ++f) {
        const std::vector<double> x = grid.point(f);
        const double r = curvature_at(spec, x).scalar;
        rmin = f == 0 ? r : std::min(rmin, r);
        rmax = f == 0 ? r : std::max(rmax, r);
        if (spec.dim() == 2) {
            const double kk = brioschi_K(spec, x);
            kmin = f == 0 ? kk : std::min(kmin, kk);
            kmax = f == 0 ? kk : std::max(kmax, kk);
        }
    }

    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "curvature.csv", curvature_csv(spec, grid));

    ordered_json rep;
    rep["subcommand"] = "curvature";
    rep["spec"] = spec_json(spec);
    rep["grid"] = counts;
    rep["extent"] = o.extent;
    rep["nodes"] = grid.total;
    rep["scalar_min"] = rmin;
    rep["scalar_max"] = rmax;
    if (spec.dim() == 2) {
        rep["gauss_min"] = kmin;
        rep["gauss_max"] = kmax;
    }
    rep["csv"] = "curvature.csv";
    emit(o, "curvature.json", rep);
    return 0;
}

int run_slice_geometry(const Options& o) {
    const MetricSpec spec = load_spec(o);
    if (spec.k < 1)
        throw MetricSpecError("slice-geometry needs at least one line direction");
    const std::vector<int> counts = x_grid_counts(spec, o.grid, 16);
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(spec), counts);

    double res_max = 0.0;
    if (spec.k == 2)
        for (std::int64_t f = 0; f < x_grid.total; ++f)
            res_max = std::max(res_max,
                               std::abs(gauss_codazzi_residual(spec, x_grid.point(f))));

    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "slice_geometry.csv", slice_geometry_csv(spec, x_grid));

    ordered_json rep;
    rep["subcommand"] = "slice-geometry";
    rep["spec"] = spec_json(spec);
    rep["grid"] = counts;
    rep["nodes"] = x_grid.total;
    if (spec.k == 2) rep["max_gauss_codazzi_residual"] = res_max;
    rep["csv"] = "slice_geometry.csv";
    emit(o, "slice_geometry.json", rep);
    return 0;
}

int run_angle_check(const Options& o) {
    const MetricSpec spec = load_spec(o);
    if (spec.k < 1)
        throw MetricSpecError("angle-check needs at least one line direction");
    const std::vector<int> counts = x_grid_counts(spec, o.grid, 16);
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(spec), counts);

    const AngleReport angle = check_angle_condition(spec, x_grid, true);

    std::string csv;
    for (int a = 0; a < spec.x_dim; ++a) {
        csv += spec.coords[a];
        csv += ',';
    }
    csv += "lhs,rhs,margin,degenerate\n";
    for (const auto& nd : angle.nodes) {
        const std::vector<double> x = x_grid.point(nd.node);
        for (double xi : x) {
            csv += num(xi);
            csv += ',';
        }
        csv += num(nd.lhs);
        csv += ',';
        csv += num(nd.rhs);
        csv += ',';
        csv += num(nd.rhs - nd.lhs);
        csv += ',';
        csv += nd.degenerate_branch ? '1' : '0';
        csv += '\n';
    }
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "angle.csv", csv);

    ordered_json rep;
    rep["subcommand"] = "angle-check";
    rep["spec"] = spec_json(spec);
    rep["grid"] = counts;
    rep["nodes"] = x_grid.total;
    rep["angle"] = angle_json(angle);
    rep["csv"] = "angle.csv";
    emit(o, "angle.json", rep);
    return angle.verdict == Verdict::Pass ? 0 : 3;
}

// overlays recognized config-file keys onto the flag values
void apply_config_keys(const json& j, Options& o, bool allow_eps) {
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "spec" || key == "params") continue;
            else if (key == "grid") {
                std::string g;
                for (const auto& v : val) {
                    if (!g.empty()) g += 'x';
                    g += std::to_string(v.get<int>());
                }
                o.grid = g;
            } else if (key == "t") o.t_count = val.get<int>();
            else if (key == "kappa0") o.kappa0 = val.get<double>();
            else if (key == "eta") o.eta = val.get<double>();
            else if (key == "eta_prime") o.eta_prime = val.get<double>();
            else if (key == "alpha") o.alpha = val.get<double>();
            else if (key == "p") o.p = val.get<double>();
            else if (key == "delta") o.delta = val.get<double>();
            else if (key == "tol") o.tol = val.get<double>();
            else if (key == "max_iter") o.max_iter = val.get<int>();
            else if (key == "retries") o.retries = val.get<int>();
            else if (key == "seed") o.seed = val.get<std::uint64_t>();
            else if (key == "order") o.order = val.get<int>();
            else if (key == "margin") o.margin = val.get<double>();
            else if (key == "force") o.force = val.get<bool>();
            else if (key == "eps" && allow_eps) o.eps = val.get<double>();
            else throw MetricSpecError("config key '" + key + "' is not recognized");
        } catch (const json::exception& e) {
            throw MetricSpecError("config key '" + key + "': " + e.what());
        }
    }
}

MetricSpec spec_from_config(const json& j) {
    if (!j.contains("spec"))
        throw MetricSpecError("config needs a 'spec' entry (family name or inline spec)");
    if (j["spec"].is_string()) {
        std::map<std::string, double> params;
        if (j.contains("params"))
            for (const auto& [key, val] : j["params"].items()) {
                try {
                    params[key] = val.get<double>();
                } catch (const json::exception&) {
                    throw MetricSpecError("config param '" + key + "' is not a number");
                }
            }
        return registry_spec(j["spec"].get<std::string>(), params);
    }
    if (j.contains("params"))
        throw MetricSpecError("config 'params' only applies to registry family names");
    return parse_metric_spec(j["spec"].dump());
}

MetricSpec resolve_spec_and_config(Options& o, bool allow_eps) {
    if (o.config.empty()) return load_spec(o);
    if (!o.spec.empty())
        throw UsageError("--config and --spec are exclusive spec sources");
    std::ifstream in(o.config);
    if (!in) throw MetricSpecError("cannot read config file '" + o.config + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw MetricSpecError("config file '" + o.config + "' is not valid JSON: " +
                              e.what());
    }
    const MetricSpec spec = spec_from_config(j);
    apply_config_keys(j, o, allow_eps);
    return spec;
}

ordered_json solver_config_json(const MetricSpec& spec, const std::vector<int>& xc,
                                int t, const Options& o, bool with_eps) {
    ordered_json c;
    c["spec"] = spec_json(spec);
    ordered_json g = xc;
    g.push_back(t);
    c["grid"] = g;
    c["kappa0"] = o.kappa0;
    c["eta"] = o.eta;
    c["eta_prime"] = o.eta_prime;
    c["alpha"] = o.alpha;
    c["p"] = o.p;
    c["delta"] = o.delta;
    c["tol"] = o.tol;
    c["max_iter"] = o.max_iter;
    c["retries"] = o.retries;
    c["margin"] = o.margin;
    c["order"] = o.order;
    c["seed"] = o.seed;
    c["force"] = o.force;
    if (with_eps) c["eps"] = o.eps;
    return c;
}

int run_solve_pde(Options& o) {
    const MetricSpec spec = resolve_spec_and_config(o, true);
    if (spec.k < 1)
        throw MetricSpecError("solve-pde needs at least one line direction");
    if (spec.x_dim < 2)
        throw MetricSpecError("solve-pde needs a closed factor of dimension at least 2");
    auto [xc, t] = w_grid_counts(spec, o.grid, o.t_count);

    ordered_json rep;
    rep["subcommand"] = "solve-pde";
    rep["config"] = solver_config_json(spec, xc, t, o, true);

    const ChartGrid x_probe = ChartGrid::make(restrict_to_x(spec), xc);
    const EllipticityCertificate cert = ellipticity_certificate(spec, x_probe);
    rep["cert"] = cert_json(cert);
    if (!cert.elliptic && !o.force) {
        rep["verdict"] = "CERT-FAIL";
        rep["reason"] = "ellipticity certificate failed; rerun with --force to override";
        emit(o, "solve.json", rep);
        return 3;
    }

    const WOperator wo = build_w_operator(spec, xc, t, o.order);
    const CConstant cc = compute_C_constant(spec, wo.x_grid, o.margin);
    const double ht = wo.w_grid.axes[spec.x_dim].h;
    const double period = ht * wo.w_grid.axes[spec.x_dim].n;
    const double eps = o.eps > 0.0 ? o.eps : period / 4.0;
    const BumpSpec bump{cc.value + 1.0, eps, period, eps >= 4.0 * ht};
    const ScalarField rhs = build_bump_rhs(wo.w_grid, bump);
    const PdeSolution sol = solve_operator(wo.op, rhs, o.tol, o.max_iter);

    double umin = sol.u[0], umax = sol.u[0];
    for (double v : sol.u) {
        umin = std::min(umin, v);
        umax = std::max(umax, v);
    }

    rep["C"] = cc.value;
    rep["amplitude"] = bump.amplitude;
    rep["eps"] = eps;
    rep["eps_resolvable"] = bump.resolvable;
    rep["rbar_min"] = wo.rbar_min;
    rep["converged"] = sol.stats.converged;
    rep["iterations"] = sol.stats.iterations;
    rep["rel_residual"] = sol.stats.rel_residual;
    rep["method"] = sol.stats.method;
    rep["u_min"] = umin;
    rep["u_max"] = umax;
    rep["uw_min"] = umin + 1.0;
    rep["uw_max"] = umax + 1.0;
    rep["verdict"] = sol.stats.converged ? "CONVERGED" : "SOLVER-FAIL";
    rep["csv"] = "u.csv";

    fs::create_directories(o.out);
    ScalarField uw(sol.u.size());
    for (size_t i = 0; i < sol.u.size(); ++i) uw[i] = sol.u[i] + 1.0;
    write_file(fs::path(o.out) / "u.csv",
               field_csv(wo.w_grid, wo.w_spec.coords, {{"u", &sol.u}, {"u_w", &uw}}));
    emit(o, "solve.json", rep);
    return sol.stats.converged ? 0 : 2;
}

int run_pipeline_cmd(Options& o) {
    const MetricSpec spec = resolve_spec_and_config(o, false);
    if (spec.k < 2)
        throw MetricSpecError("pipeline needs at least two line directions");
    if (spec.x_dim < 2)
        throw MetricSpecError("pipeline needs a closed factor of dimension at least 2");
    auto [xc, t] = w_grid_counts(spec, o.grid, o.t_count);

    PipelineConfig pc;
    pc.x_counts = xc;
    pc.t_count = t;
    pc.eta = o.eta;
    pc.eta_prime = o.eta_prime;
    pc.alpha = o.alpha;
    pc.p = o.p;
    pc.delta = o.delta;
    pc.kappa0 = o.kappa0;
    pc.tol = o.tol;
    pc.max_iter = o.max_iter;
    pc.retries = o.retries;
    pc.margin = o.margin;
    pc.order = o.order;
    pc.seed = o.seed;
    pc.force = o.force;

    const PipelineReport pr = run_pipeline(spec, pc);

    ordered_json rep;
    rep["subcommand"] = "pipeline";
    rep["config"] = solver_config_json(spec, xc, t, o, false);
    rep["verdict"] = pipeline_verdict_name(pr.verdict);
    rep["reason"] = pr.reason;
    rep["angle"] = angle_json(pr.angle);
    rep["cert"] = cert_json(pr.cert);
    rep["C"] = pr.C;
    rep["rbar_min"] = pr.rbar_min;
    rep["kappa0"] = pr.kappa0;
    ordered_json attempts = ordered_json::array();
    for (const auto& at : pr.attempts) {
        ordered_json a;
        a["eps"] = at.eps;
        a["converged"] = at.stats.converged;
        a["iterations"] = at.stats.iterations;
        a["rel_residual"] = at.stats.rel_residual;
        ordered_json g;
        g["c1alpha"] = at.gates.c1alpha;
        g["c1alpha_ok"] = at.gates.c1alpha_ok;
        g["d2t"] = at.gates.d2t;
        g["d2t_measured"] = at.gates.d2t_measured;
        g["d2t_ok"] = at.gates.d2t_ok;
        g["uw_min"] = at.gates.uw_min;
        g["uw_max"] = at.gates.uw_max;
        g["uw_ok"] = at.gates.uw_ok;
        g["quotient_max"] = at.gates.quotient_max;
        g["quotient_ok"] = at.gates.quotient_ok;
        g["a1_max"] = at.gates.a1_max;
        g["a1_ok"] = at.gates.a1_ok;
        a["gates"] = g;
        a["rtilde_min"] = at.rtilde_min;
        a["rtilde_max"] = at.rtilde_max;
        a["crosscheck_dev"] = at.crosscheck_dev;
        a["crosscheck_scale"] = at.crosscheck_scale;
        a["note"] = at.note;
        attempts.push_back(a);
    }
    rep["attempts"] = attempts;

    fs::create_directories(o.out);
    if (!pr.u.empty()) {
        std::vector<int> wc = xc;
        wc.push_back(t);
        const ChartGrid w_grid = ChartGrid::make(pr.w_spec, wc);
        ScalarField uw(pr.u.size());
        for (size_t i = 0; i < pr.u.size(); ++i) uw[i] = pr.u[i] + 1.0;
        write_file(fs::path(o.out) / "u.csv",
                   field_csv(w_grid, pr.w_spec.coords, {{"u", &pr.u}, {"u_w", &uw}}));
        rep["u_csv"] = "u.csv";
    }
    if (!pr.rtilde.empty()) {
        const ChartGrid x_grid = ChartGrid::make(pr.x_spec, xc);
        write_file(fs::path(o.out) / "rtilde.csv",
                   field_csv(x_grid, pr.x_spec.coords, {{"rtilde", &pr.rtilde}}));
        rep["rtilde_csv"] = "rtilde.csv";
    }
    emit(o, "pipeline.json", rep);

    switch (pr.verdict) {
        case PipelineVerdict::Success: return 0;
        case PipelineVerdict::SolverFail: return 2;
        default: return 3;
    }
}

int run_yamabe(const Options& o) {
    const MetricSpec spec = load_spec(o);
    if (spec.k != 0)
        throw MetricSpecError("yamabe needs a closed spec (no line directions)");
    const std::vector<int> counts = full_grid_counts(spec, o.grid);
    const ChartGrid grid = ChartGrid::make(spec, counts);

    const ScalarField ones(grid.total, 1.0);
    const double e1 = yamabe_quotient(spec, grid, ones);
    const SpectrumBound sb = spectrum_lower_bound(spec, grid, o.tol);

    ordered_json rep;
    rep["subcommand"] = "yamabe";
    rep["spec"] = spec_json(spec);
    rep["grid"] = counts;
    rep["energy_at_one"] = e1;
    rep["lambda_min"] = sb.lambda_min;
    rep["iterations"] = sb.iterations;
    rep["converged"] = sb.converged;
    emit(o, "yamabe.json", rep);
    return sb.converged ? 0 : 2;
}

int run_reproduce(const Options& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const double a = 3.0;

    // the coupled line block on its own, line charts over [-3,3]
    MetricSpec block;
    block.coords = {"zeta", "xi"};
    block.topology = {Topology{TopKind::Line, 0.0, -1}, Topology{TopKind::Line, 0.0, -1}};
    block.x_dim = 0;
    block.k = 2;
    const ExprPtr diag = parse_expr("3", block.coords);
    const ExprPtr cross = parse_expr("1/((1+exp(-xi))*(1+exp(-zeta)))", block.coords);
    block.comp = {{diag, cross}, {cross, diag}};
    const ChartGrid bgrid = ChartGrid::make(block, {64, 64});

    double kmin = 0.0, kmax = 0.0;
    for (std::int64_t f = 0; f < bgrid.total; ++f) {
        const double kk = brioschi_K(block, bgrid.point(f));
        kmin = f == 0 ? kk : std::min(kmin, kk);
        kmax = f == 0 ? kk : std::max(kmax, kk);
    }
    const double k_origin = brioschi_K(block, {0.0, 0.0});
    const double k_expected = 9.0 / 1278.0625;
    const double k_bound = 9.0 / 256.0;

    // angle condition of the full product at the origin
    const MetricSpec ambient = registry_spec("example-2-1");
    const AngleTerms origin = angle_terms(ambient, {0.0, 0.0});

    // recenters the coupling at every block node via shift parameters and
    // checks the condition fails there, against the closed form
    json shifted;
    shifted["coords"] = {"x1", "x2", "zeta", "xi"};
    shifted["topology"]["x1"] = "periodic";
    shifted["topology"]["x2"] = "periodic";
    shifted["topology"]["zeta"] = "line";
    shifted["topology"]["xi"] = "line";
    shifted["components"]["x1,x1"] = "1";
    shifted["components"]["x2,x2"] = "1";
    shifted["components"]["zeta,zeta"] = "3";
    shifted["components"]["xi,xi"] = "3";
    shifted["components"]["zeta,xi"] = "1/((1+exp(-(xi+XI0)))*(1+exp(-(zeta+ZETA0))))";

    bool fails_everywhere = true;
    double closed_form_dev = 0.0;
    for (std::int64_t f = 0; f < bgrid.total; ++f) {
        const std::vector<double> pt = bgrid.point(f);
        shifted["params"]["ZETA0"] = pt[0];
        shifted["params"]["XI0"] = pt[1];
        const MetricSpec sh = parse_metric_spec(shifted.dump());
        const AngleTerms at = angle_terms(sh, {0.0, 0.0});
        if (!(at.lhs > at.rhs)) fails_everywhere = false;
        const double b0 = 1.0 / ((1.0 + std::exp(-pt[1])) * (1.0 + std::exp(-pt[0])));
        const double lhs_cf = 1.0 + 2.0 * (a * a - b0 * b0) / (b0 * b0);
        closed_form_dev = std::max(closed_form_dev,
                                   std::abs(at.lhs - lhs_cf) / lhs_cf);
    }

    // the report the pipeline would consult, on a coarse closed grid
    const ChartGrid x_grid = ChartGrid::make(restrict_to_x(ambient), {16, 16});
    const AngleReport xrep = check_angle_condition(ambient, x_grid);

    const bool k_positive = kmin > 0.0;
    const bool k_bounded = kmax < k_bound;
    const bool k_origin_ok = std::abs(k_origin - k_expected) <= 1e-9;
    const bool lhs_origin_ok = std::abs(origin.lhs - 287.0) <= 1e-9;
    const bool origin_fails = origin.lhs > origin.rhs;
    const bool closed_form_ok = closed_form_dev <= 1e-8;
    const bool grid_fails = xrep.verdict == Verdict::Fail;
    const bool pass = k_positive && k_bounded && k_origin_ok && lhs_origin_ok &&
                      origin_fails && fails_everywhere && closed_form_ok && grid_fails;

    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "example_2_1_curvature.csv", curvature_csv(block, bgrid));

    ordered_json rep;
    rep["subcommand"] = "reproduce-example-2-1";
    rep["a"] = a;
    rep["block_grid"] = {64, 64};
    rep["gauss_min"] = kmin;
    rep["gauss_max"] = kmax;
    rep["gauss_bound"] = k_bound;
    rep["gauss_positive"] = k_positive;
    rep["gauss_bounded"] = k_bounded;
    rep["gauss_origin"] = k_origin;
    rep["gauss_origin_expected"] = k_expected;
    rep["gauss_origin_ok"] = k_origin_ok;
    rep["angle_lhs_origin"] = origin.lhs;
    rep["angle_rhs_origin"] = origin.rhs;
    rep["angle_lhs_origin_ok"] = lhs_origin_ok;
    rep["angle_fails_origin"] = origin_fails;
    rep["angle_fails_everywhere"] = fails_everywhere;
    rep["closed_form_dev"] = closed_form_dev;
    rep["closed_form_ok"] = closed_form_ok;
    rep["x_grid_verdict"] = verdict_name(xrep.verdict);
    rep["x_grid_verdict_fail"] = grid_fails;
    rep["audit_pass"] = pass;
    rep["csv"] = "example_2_1_curvature.csv";
    emit(o, "example_2_1.json", rep);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "audit %s in %.2f s\n", pass ? "passed" : "FAILED", secs);
    return pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"curvature, slice geometry, angle conditions, and the conformal "
                 "deformation pipeline for product metrics"};
    app.require_subcommand(1);

    auto add_spec = [&](CLI::App* c) {
        c->add_option("--spec", o.spec, "registry family name or JSON spec file");
        c->add_option("--x", o.x_family, "closed-block family when --spec product");
        c->add_option("--param", o.params, "spec parameter name=value (repeatable)");
        c->add_option("--n", o.n, "override n = dim X + 1 (flat-torus)");
        c->add_option("--k", o.k, "override the number of line directions");
    };
    auto add_common = [&](CLI::App* c) {
        c->add_option("--grid", o.grid, "node counts, e.g. 64x64x32");
        c->add_option("--out", o.out, "output directory");
    };
    auto add_solver = [&](CLI::App* c) {
        c->add_option("--tol", o.tol, "linear solver tolerance");
        c->add_option("--max-iter", o.max_iter, "linear solver iteration cap");
        c->add_option("--stencil-order", o.order, "difference order")
            ->check(CLI::IsMember({2, 4}));
        c->add_option("--t", o.t_count, "circle direction node count");
        c->add_flag("--force", o.force, "proceed despite a failed ellipticity certificate");
        c->add_option("--margin", o.margin, "extra slack added to the C constant");
    };

    CLI::App* curv = app.add_subcommand("curvature", "scalar curvature over a grid");
    add_spec(curv);
    add_common(curv);
    curv->add_option("--extent", o.extent, "half-width of line charts");

    CLI::App* slice = app.add_subcommand("slice-geometry",
                                         "extrinsic data of the slice tower over X");
    add_spec(slice);
    add_common(slice);

    CLI::App* angle = app.add_subcommand("angle-check",
                                         "angle condition verdict over an X grid");
    add_spec(angle);
    add_common(angle);

    CLI::App* solve = app.add_subcommand("solve-pde",
                                         "deformation equation on X x S^1 with bump data");
    add_spec(solve);
    add_common(solve);
    add_solver(solve);
    solve->add_option("--eps", o.eps, "bump support half-width (default: period / 4)");
    solve->add_option("--config", o.config, "JSON config (spec + solver options)");

    CLI::App* pipe = app.add_subcommand("pipeline",
                                        "full deformation pipeline with verdict");
    add_spec(pipe);
    add_common(pipe);
    add_solver(pipe);
    pipe->add_option("--kappa0", o.kappa0, "uniform positivity floor for R");
    pipe->add_option("--eta", o.eta, "Hoelder norm gate");
    pipe->add_option("--eta-prime", o.eta_prime, "second t derivative gate");
    pipe->add_option("--alpha", o.alpha, "Hoelder exponent");
    pipe->add_option("--p", o.p, "integrability exponent (0 picks n + 1)");
    pipe->add_option("--delta", o.delta, "mass budget steering the first support width");
    pipe->add_option("--retries", o.retries, "support halvings after gate failure");
    pipe->add_option("--seed", o.seed, "pair sampling seed for the Hoelder norm");
    pipe->add_option("--config", o.config, "JSON config (spec + pipeline options)");

    CLI::App* yam = app.add_subcommand("yamabe",
                                       "conformal energy and spectrum bound on a closed spec");
    add_spec(yam);
    add_common(yam);
    yam->add_option("--tol", o.tol, "inverse iteration tolerance");

    CLI::App* repro = app.add_subcommand("reproduce-example-2-1",
                                         "audit of the coupled-block example");
    repro->add_option("--out", o.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(curv)) return run_curvature(o);
        if (app.got_subcommand(slice)) return run_slice_geometry(o);
        if (app.got_subcommand(angle)) return run_angle_check(o);
        if (app.got_subcommand(solve)) return run_solve_pde(o);
        if (app.got_subcommand(pipe)) return run_pipeline_cmd(o);
        if (app.got_subcommand(yam)) return run_yamabe(o);
        if (app.got_subcommand(repro)) return run_reproduce(o);
        std::fprintf(stderr, "error: no subcommand\n");
        return 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const MetricSpecError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ExprError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const GeometryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}

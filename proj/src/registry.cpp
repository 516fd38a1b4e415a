#include "psc/registry.hpp"

#include <json.hpp>

#include <cmath>

namespace psc {

namespace {

using json = nlohmann::json;

std::map<std::string, double> merged(const RegistryEntry& entry,
                                     const std::map<std::string, double>& params) {
    std::map<std::string, double> out = entry.defaults;
    for (const auto& [key, val] : params) {
        auto it = out.find(key);
        if (it == out.end())
            throw MetricSpecError("family '" + entry.name + "' has no parameter '" + key + "'");
        it->second = val;
    }
    return out;
}

void add_lines(json& cfg, int k) {
    std::vector<std::string> names;
    if (k == 2) {
        names = {"zeta", "xi"};
    } else {
        for (int j = 1; j <= k; ++j) names.push_back("r" + std::to_string(j));
    }
    for (const auto& name : names) {
        cfg["coords"].push_back(name);
        cfg["topology"][name] = "line";
        cfg["components"][name + "," + name] = "1";
    }
}

json torus_base(int dim) {
    json cfg;
    cfg["coords"] = json::array();
    cfg["topology"] = json::object();
    cfg["components"] = json::object();
    for (int i = 1; i <= dim; ++i) {
        const std::string name = "x" + std::to_string(i);
        cfg["coords"].push_back(name);
        cfg["topology"][name] = "periodic";
        cfg["components"][name + "," + name] = "1";
    }
    return cfg;
}

json sphere_base(double r) {
    json cfg;
    cfg["coords"] = json::array({"theta", "phi"});
    cfg["topology"]["theta"] = {{"kind", "polar"}, {"azimuth", "phi"}};
    cfg["topology"]["phi"] = "periodic";
    cfg["params"]["r"] = r;
    cfg["components"]["theta,theta"] = "r^2";
    cfg["components"]["phi,phi"] = "r^2*sin(theta)^2";
    return cfg;
}

} // namespace

const std::vector<RegistryEntry>& registry_entries() {
    static const std::vector<RegistryEntry> entries = {
        {"flat-torus",
         "flat torus cross flat lines, every projected normal degenerate",
         {{"dim", 2.0}, {"k", 2.0}}},
        {"example-2-1",
         "flat 2-torus with coupled line directions, strict angle violation",
         {{"a", 3.0}}},
        {"round-sphere",
         "round 2-sphere cross flat lines",
         {{"r", 1.0}, {"k", 2.0}}},
        {"perturbed-product",
         "round 2-sphere with a sphere-line cross term tilting the outer normal",
         {{"r", 1.0}, {"amp", 0.1}, {"mode", 1.0}}},
        {"product",
         "plain product of a closed block and flat lines, round 2-sphere block",
         {{"r", 1.0}, {"k", 2.0}}},
        {"sphere-circle",
         "closed product of a round 2-sphere and a circle, no line directions",
         {{"r", 1.0}, {"L", 2.0 * M_PI}}},
    };
    return entries;
}

MetricSpec registry_spec(const std::string& name,
                         const std::map<std::string, double>& params) {
    const RegistryEntry* entry = nullptr;
    for (const auto& e : registry_entries())
        if (e.name == name) entry = &e;
    if (!entry) {
        std::string known;
        for (const auto& e : registry_entries()) known += " " + e.name;
        throw MetricSpecError("unknown metric family '" + name + "'; known:" + known);
    }
    const auto p = merged(*entry, params);

    json cfg;
    if (name == "flat-torus") {
        const int dim = static_cast<int>(p.at("dim"));
        const int k = static_cast<int>(p.at("k"));
        if (dim < 2 || dim + k > kMaxVars)
            throw MetricSpecError("flat-torus: dim must be at least 2 and dim + k at most " +
                                  std::to_string(kMaxVars));
        cfg = torus_base(dim);
        add_lines(cfg, k);
    } else if (name == "example-2-1") {
        cfg = torus_base(2);
        add_lines(cfg, 2);
        cfg["params"]["a"] = p.at("a");
        cfg["components"]["zeta,zeta"] = "a";
        cfg["components"]["xi,xi"] = "a";
        cfg["components"]["zeta,xi"] = "1/((1+exp(-xi))*(1+exp(-zeta)))";
    } else if (name == "round-sphere" || name == "product") {
        const int k = static_cast<int>(p.at("k"));
        if (k < 1 || 2 + k > kMaxVars)
            throw MetricSpecError(name + ": k must be between 1 and " +
                                  std::to_string(kMaxVars - 2));
        cfg = sphere_base(p.at("r"));
        add_lines(cfg, k);
    } else if (name == "perturbed-product") {
        const double r = p.at("r");
        const double amp = p.at("amp");
        if (!(std::abs(amp) < r))
            throw MetricSpecError("perturbed-product: |amp| must stay under r");
        cfg = sphere_base(r);
        add_lines(cfg, 2);
        cfg["params"]["amp"] = amp;
        cfg["params"]["mode"] = p.at("mode");
        cfg["components"]["theta,zeta"] = "amp*sin(mode*theta)";
    } else {
        cfg = sphere_base(p.at("r"));
        cfg["coords"].push_back("s");
        cfg["topology"]["s"] = {{"kind", "periodic"}, {"period", p.at("L")}};
        cfg["components"]["s,s"] = "1";
    }
    return parse_metric_spec(cfg.dump());
}

} // namespace psc

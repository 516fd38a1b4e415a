#include "psc/metric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace psc {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

bool depends_on(const ExprPtr& e, int var) {
    if (!e) return false;
    if (e->op == ExprOp::Var) return e->var == var;
    return depends_on(e->a, var) || depends_on(e->b, var);
}

int coord_index(const MetricSpec& spec, const std::string& name) {
    for (size_t i = 0; i < spec.coords.size(); ++i)
        if (spec.coords[i] == name) return static_cast<int>(i);
    throw MetricSpecError("unknown coordinate '" + name + "'");
}

Topology parse_topology_entry(const json& j, const std::string& coord) {
    Topology t;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "line") { t.kind = TopKind::Line; return t; }
        if (s == "periodic") { t.kind = TopKind::Periodic; t.period = 2.0 * M_PI; return t; }
        throw MetricSpecError("topology for '" + coord + "': unknown shorthand '" + s + "'");
    }
    if (!j.is_object() || !j.contains("kind"))
        throw MetricSpecError("topology for '" + coord + "' must be a string or {\"kind\": ...}");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "line") {
        t.kind = TopKind::Line;
    } else if (kind == "periodic") {
        t.kind = TopKind::Periodic;
        t.period = j.value("period", 2.0 * M_PI);
        if (!(t.period > 0.0))
            throw MetricSpecError("topology for '" + coord + "': period must be positive");
    } else if (kind == "polar") {
        t.kind = TopKind::PolarTheta;
        if (!j.contains("azimuth"))
            throw MetricSpecError("topology for '" + coord + "': polar needs an \"azimuth\" coordinate");
    } else {
        throw MetricSpecError("topology for '" + coord + "': unknown kind '" + kind + "'");
    }
    return t;
}

} // namespace

bool MetricSpec::has_expr_dependence(int var) const {
    for (int i = 0; i < dim(); ++i)
        for (int j = i; j < dim(); ++j)
            if (depends_on(comp[i][j], var)) return true;
    return false;
}

MetricSpec parse_metric_spec(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw MetricSpecError(std::string("config is not valid JSON: ") + e.what());
    }
    for (const char* key : {"coords", "topology", "components"})
        if (!root.contains(key))
            throw MetricSpecError(std::string("config missing required key \"") + key + "\"");

    MetricSpec spec;
    for (const auto& c : root.at("coords")) {
        std::string name = c.get<std::string>();
        if (std::find(spec.coords.begin(), spec.coords.end(), name) != spec.coords.end())
            throw MetricSpecError("duplicate coordinate '" + name + "'");
        spec.coords.push_back(name);
    }
    int d = spec.dim();
    if (d < 2) throw MetricSpecError("need at least two coordinates");
    if (d > kMaxVars)
        throw MetricSpecError("more coordinates than the jet arithmetic supports");

    const json& topo = root.at("topology");
    spec.topology.resize(d);
    for (int i = 0; i < d; ++i) {
        if (!topo.contains(spec.coords[i]))
            throw MetricSpecError("topology missing coordinate '" + spec.coords[i] + "'");
        spec.topology[i] = parse_topology_entry(topo.at(spec.coords[i]), spec.coords[i]);
        if (spec.topology[i].kind == TopKind::PolarTheta) {
            std::string az = topo.at(spec.coords[i]).at("azimuth").get<std::string>();
            spec.topology[i].azimuth = coord_index(spec, az);
        }
    }
    for (int i = 0; i < d; ++i) {
        if (spec.topology[i].kind != TopKind::PolarTheta) continue;
        const Topology& pair = spec.topology[spec.topology[i].azimuth];
        if (pair.kind != TopKind::Periodic || std::fabs(pair.period - 2.0 * M_PI) > 1e-12)
            throw MetricSpecError("polar coordinate '" + spec.coords[i] +
                                  "' needs a 2*pi periodic azimuth partner");
    }

    // closed directions first, line directions trailing; that fixes the split
    int first_line = d;
    for (int i = 0; i < d; ++i) {
        if (spec.topology[i].kind == TopKind::Line) {
            if (first_line == d) first_line = i;
        } else if (first_line != d) {
            throw MetricSpecError("line coordinates must come after the closed ones");
        }
    }
    spec.x_dim = first_line;
    spec.k = d - first_line;
    if (spec.x_dim < 2)
        throw MetricSpecError("the closed factor must have dimension at least 2");

    std::vector<std::pair<std::string, double>> params;
    if (root.contains("params")) {
        for (auto it = root.at("params").begin(); it != root.at("params").end(); ++it)
            params.emplace_back(it.key(), it.value().get<double>());
    }

    spec.comp.assign(d, std::vector<ExprPtr>(d, nullptr));
    std::set<std::pair<int, int>> seen;
    for (auto it = root.at("components").begin(); it != root.at("components").end(); ++it) {
        std::string key = it.key();
        size_t comma = key.find(',');
        std::string a = key.substr(0, comma);
        std::string b = comma == std::string::npos ? a : key.substr(comma + 1);
        int i = coord_index(spec, a);
        int j = coord_index(spec, b);
        auto canon = std::minmax(i, j);
        if (seen.count({canon.first, canon.second}))
            throw MetricSpecError("component \"" + key + "\" duplicates an entry given elsewhere");
        seen.insert({canon.first, canon.second});
        ExprPtr e;
        try {
            e = parse_expr_with_params(it.value().get<std::string>(), spec.coords, params);
        } catch (const ExprError& err) {
            throw MetricSpecError("component \"" + key + "\" at byte " +
                                  std::to_string(err.offset) + ": " + err.what());
        }
        spec.comp[i][j] = e;
        spec.comp[j][i] = e;
    }
    for (int i = 0; i < d; ++i) {
        if (!spec.comp[i][i])
            throw MetricSpecError("missing diagonal component for '" + spec.coords[i] + "'");
        for (int j = i + 1; j < d; ++j)
            if (!spec.comp[i][j]) {
                spec.comp[i][j] = make_num(0.0);
                spec.comp[j][i] = spec.comp[i][j];
            }
    }
    return spec;
}

std::string metric_spec_to_json(const MetricSpec& spec) {
    ordered_json root;
    root["coords"] = spec.coords;
    ordered_json topo;
    for (int i = 0; i < spec.dim(); ++i) {
        const Topology& t = spec.topology[i];
        switch (t.kind) {
            case TopKind::Line: topo[spec.coords[i]] = "line"; break;
            case TopKind::Periodic:
                topo[spec.coords[i]] = {{"kind", "periodic"}, {"period", t.period}};
                break;
            case TopKind::PolarTheta:
                topo[spec.coords[i]] = {{"kind", "polar"}, {"azimuth", spec.coords[t.azimuth]}};
                break;
        }
    }
    root["topology"] = topo;
    root["params"] = ordered_json::object();
    ordered_json comps;
    for (int i = 0; i < spec.dim(); ++i)
        for (int j = i; j < spec.dim(); ++j)
            if (!is_zero(spec.comp[i][j]))
                comps[spec.coords[i] + "," + spec.coords[j]] =
                    print_expr(spec.comp[i][j], spec.coords);
    root["components"] = comps;
    return root.dump(2);
}

MetricSpec conformal_rescale(const MetricSpec& spec, const ExprPtr& phi) {
    MetricSpec out = spec;
    for (int i = 0; i < spec.dim(); ++i)
        for (int j = i; j < spec.dim(); ++j) {
            ExprPtr scaled = is_zero(spec.comp[i][j])
                                 ? spec.comp[i][j]
                                 : conformal_scale(spec.comp[i][j], phi);
            out.comp[i][j] = scaled;
            out.comp[j][i] = scaled;
        }
    return out;
}

MetricSpec with_circle(const MetricSpec& spec, double period) {
    MetricSpec out = spec;
    int d = spec.dim();
    if (d + 1 > kMaxVars)
        throw MetricSpecError("no room for the circle direction");
    if (std::find(spec.coords.begin(), spec.coords.end(), "t") != spec.coords.end())
        throw MetricSpecError("coordinate name 't' is reserved for the circle direction");
    out.coords.push_back("t");
    Topology t;
    t.kind = TopKind::Periodic;
    t.period = period;
    out.topology.push_back(t);
    out.comp.assign(d + 1, std::vector<ExprPtr>(d + 1, make_num(0.0)));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.comp[i][j] = spec.comp[i][j];
    out.comp[d][d] = make_num(1.0);
    return out;
}

} // namespace psc

#pragma once

// On-disk formats: the canonical network file (strict JSON schema) and JSON
// export of payoff profiles and equilibrium reports.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "midmarket/equilibrium.hpp"
#include "midmarket/network.hpp"

namespace midmarket {

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw FormatError("unknown field \"" + it.key() + "\" in " + where);
    }
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw FormatError("missing field \"" + std::string(key) + "\" in " + where);
    if (!obj[key].is_number()) throw FormatError("field \"" + std::string(key) + "\" in " + where + " must be a number");
    return obj[key].get<double>();
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw FormatError("missing field \"" + std::string(key) + "\" in " + where);
    if (!obj[key].is_string()) throw FormatError("field \"" + std::string(key) + "\" in " + where + " must be a string");
    return obj[key].get<std::string>();
}

}  // namespace detail

inline TradingNetwork network_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("network file must contain a JSON object");
    detail::reject_unknown(j, {"nodes", "edges", "discount", "f"}, "network");
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw FormatError("network requires a \"nodes\" array");
    if (!j.contains("edges") || !j["edges"].is_array())
        throw FormatError("network requires an \"edges\" array");

    std::vector<Node> nodes;
    for (const auto& jn : j["nodes"]) {
        detail::reject_unknown(jn, {"id", "class", "population", "value"}, "node");
        Node n;
        n.id = detail::require_string(jn, "id", "node");
        std::string cls = detail::require_string(jn, "class", "node " + n.id);
        if (cls == "producer") n.cls = NodeClass::Producer;
        else if (cls == "middleman") n.cls = NodeClass::Middleman;
        else if (cls == "consumer") n.cls = NodeClass::Consumer;
        else throw FormatError("node " + n.id + ": unknown class \"" + cls + "\"");
        n.population = detail::require_number(jn, "population", "node " + n.id);
        if (jn.contains("value")) {
            if (!jn["value"].is_number()) throw FormatError("node " + n.id + ": value must be a number");
            n.value = jn["value"].get<double>();
        }
        nodes.push_back(std::move(n));
    }
    std::vector<Edge> edges;
    for (const auto& je : j["edges"]) {
        detail::reject_unknown(je, {"from", "to", "cost", "pi"}, "edge");
        Edge e;
        e.from = detail::require_string(je, "from", "edge");
        e.to = detail::require_string(je, "to", "edge");
        e.cost = detail::require_number(je, "cost", "edge " + e.from + "->" + e.to);
        e.pi = detail::require_number(je, "pi", "edge " + e.from + "->" + e.to);
        edges.push_back(std::move(e));
    }
    std::optional<double> discount, f;
    if (j.contains("discount")) discount = detail::require_number(j, "discount", "network");
    if (j.contains("f")) f = detail::require_number(j, "f", "network");
    return TradingNetwork(std::move(nodes), std::move(edges), discount, f);
}

inline TradingNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("cannot parse " + path + ": " + e.what());
    }
    return network_from_json(j);
}

inline nlohmann::json network_to_json(const TradingNetwork& net) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : net.nodes()) {
        nlohmann::json jn{{"id", n.id}, {"class", to_string(n.cls)}, {"population", n.population}};
        if (n.value) jn["value"] = *n.value;
        j["nodes"].push_back(std::move(jn));
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : net.edges())
        j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"cost", e.cost}, {"pi", e.pi}});
    if (net.discount()) j["discount"] = *net.discount();
    if (net.patience_f()) j["f"] = *net.patience_f();
    return j;
}

inline void save_network(const TradingNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write network file: " + path);
    out << network_to_json(net).dump(2) << '\n';
}

inline nlohmann::json profile_to_json(const TradingNetwork& net, const PayoffProfile& p,
                                      const std::vector<Support>& support,
                                      const MarketState& state) {
    nlohmann::json j;
    for (std::size_t v = 0; v < net.nodes().size(); ++v)
        j["nodes"][net.nodes()[v].id] = {{"u0", p.u0[v]}, {"u1", p.u1[v]}};
    j["edges"] = nlohmann::json::array();
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        const char* sup = support[e] == Support::Active
                              ? "active"
                              : (support[e] == Support::Inactive ? "inactive" : "pinned");
        j["edges"].push_back({{"from", net.edges()[e].from},
                              {"to", net.edges()[e].to},
                              {"z", p.z[e]},
                              {"z_scaled", p.z_scaled[e]},
                              {"support", sup}});
    }
    for (std::size_t s = 0; s < net.middlemen().size(); ++s) {
        const std::string& id = net.nodes()[net.middlemen()[s]].id;
        j["mu"][id] = state.mu[s];
        if (state.degenerate[s]) j["degenerate"].push_back(id);
    }
    j["patient"] = p.patient;
    return j;
}

inline nlohmann::json report_to_json(const TradingNetwork& net, const EquilibriumReport& rep) {
    nlohmann::json j;
    j["verified"] = rep.verified;
    j["boundary"] = rep.boundary;
    j["method"] = to_string(rep.method);
    if (!rep.diagnostic.empty()) j["diagnostic"] = rep.diagnostic;
    j["pattern"] = nlohmann::json::array();
    for (std::size_t e = 0; e < net.edges().size(); ++e)
        j["pattern"].push_back({{"from", net.edges()[e].from},
                                {"to", net.edges()[e].to},
                                {"disposition", to_string(rep.pattern.disp[e])},
                                {"lambda", rep.pattern.lambda[e]}});
    if (!rep.profile.u0.empty() && rep.state.mu.size() == net.middlemen().size())
        j["payoffs"] = profile_to_json(net, rep.profile, support_from(rep.pattern), rep.state);
    j["violations"] = nlohmann::json::array();
    for (const auto& v : rep.violations.violations)
        j["violations"].push_back(v.describe(net));
    j["metadata"] = {{"sign_tol", rep.sign_tol}, {"iterations", rep.iterations}};
    return j;
}

}  // namespace midmarket

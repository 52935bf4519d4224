#pragma once

// Trading-network model: producer/middleman/consumer populations joined by
// directed trade edges, plus the market's matching distribution and patience.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace midmarket {

enum class NodeClass : std::uint8_t { Producer, Middleman, Consumer };

inline const char* to_string(NodeClass c) {
    switch (c) {
        case NodeClass::Producer: return "producer";
        case NodeClass::Middleman: return "middleman";
        case NodeClass::Consumer: return "consumer";
    }
    return "?";
}

struct Node {
    std::string id;
    NodeClass cls = NodeClass::Producer;
    double population = 1.0;
    std::optional<double> value;  // consumption value, consumers only
};

struct Edge {
    std::string from;
    std::string to;
    double cost = 0.0;
    double pi = 0.0;  // matching probability mass of this edge
};

// Edge partition by endpoint classes.
enum class EdgeClass : std::uint8_t { ProducerConsumer, ProducerMiddleman, MiddlemanConsumer, Illegal };

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const {
        std::ostringstream os;
        for (const auto& v : violations) os << v << '\n';
        return os.str();
    }
};

// Immutable after construction. Nodes and edges are held in canonical order
// (sorted by id and by (from,to)) so that downstream enumeration and reports
// do not depend on input order.
class TradingNetwork {
public:
    TradingNetwork() = default;

    TradingNetwork(std::vector<Node> nodes, std::vector<Edge> edges,
                   std::optional<double> discount, std::optional<double> f)
        : nodes_(std::move(nodes)), edges_(std::move(edges)), discount_(discount), f_(f) {
        canonicalize();
    }

    static TradingNetwork with_discount_factor(std::vector<Node> n, std::vector<Edge> e, double delta) {
        return TradingNetwork(std::move(n), std::move(e), delta, std::nullopt);
    }
    static TradingNetwork with_patience(std::vector<Node> n, std::vector<Edge> e, double f) {
        return TradingNetwork(std::move(n), std::move(e), std::nullopt, f);
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::optional<double> discount() const { return discount_; }
    std::optional<double> patience_f() const { return f_; }

    // Copy with the patience parameter replaced (CLI overrides).
    TradingNetwork rescaled_f(double f) const { return TradingNetwork(nodes_, edges_, std::nullopt, f); }
    TradingNetwork rescaled_discount(double d) const { return TradingNetwork(nodes_, edges_, d, std::nullopt); }

    int node_index(std::string_view id) const {
        auto it = index_.find(std::string(id));
        return it == index_.end() ? -1 : it->second;
    }
    int edge_index(std::string_view from, std::string_view to) const {
        for (std::size_t i = 0; i < edges_.size(); ++i)
            if (edges_[i].from == from && edges_[i].to == to) return static_cast<int>(i);
        return -1;
    }

    int edge_from(std::size_t e) const { return efrom_[e]; }
    int edge_to(std::size_t e) const { return eto_[e]; }

    EdgeClass edge_class(std::size_t e) const {
        int a = efrom_[e], b = eto_[e];
        if (a < 0 || b < 0) return EdgeClass::Illegal;
        NodeClass ca = nodes_[a].cls, cb = nodes_[b].cls;
        if (ca == NodeClass::Producer && cb == NodeClass::Consumer) return EdgeClass::ProducerConsumer;
        if (ca == NodeClass::Producer && cb == NodeClass::Middleman) return EdgeClass::ProducerMiddleman;
        if (ca == NodeClass::Middleman && cb == NodeClass::Consumer) return EdgeClass::MiddlemanConsumer;
        return EdgeClass::Illegal;
    }

    const std::vector<int>& middlemen() const { return middlemen_; }
    // Slot of a node in the middleman list, -1 for non-middlemen.
    int middleman_slot(int node) const { return mslot_[node]; }
    const std::vector<int>& in_edges(int node) const { return in_[node]; }
    const std::vector<int>& out_edges(int node) const { return out_[node]; }

    std::size_t count(NodeClass c) const {
        std::size_t n = 0;
        for (const auto& nd : nodes_) n += (nd.cls == c);
        return n;
    }

    double max_consumer_value() const {
        double m = 0.0;
        for (const auto& nd : nodes_)
            if (nd.cls == NodeClass::Consumer && nd.value) m = std::max(m, *nd.value);
        return m;
    }

private:
    void canonicalize() {
        std::sort(nodes_.begin(), nodes_.end(),
                  [](const Node& a, const Node& b) { return a.id < b.id; });
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return a.from != b.from ? a.from < b.from : a.to < b.to;
        });
        index_.clear();
        for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].id] = static_cast<int>(i);
        efrom_.resize(edges_.size());
        eto_.resize(edges_.size());
        in_.assign(nodes_.size(), {});
        out_.assign(nodes_.size(), {});
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            efrom_[e] = node_index(edges_[e].from);
            eto_[e] = node_index(edges_[e].to);
            if (efrom_[e] >= 0) out_[efrom_[e]].push_back(static_cast<int>(e));
            if (eto_[e] >= 0) in_[eto_[e]].push_back(static_cast<int>(e));
        }
        middlemen_.clear();
        mslot_.assign(nodes_.size(), -1);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].cls == NodeClass::Middleman) {
                mslot_[i] = static_cast<int>(middlemen_.size());
                middlemen_.push_back(static_cast<int>(i));
            }
    }

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::optional<double> discount_;
    std::optional<double> f_;
    std::unordered_map<std::string, int> index_;
    std::vector<int> efrom_, eto_;
    std::vector<std::vector<int>> in_, out_;
    std::vector<int> middlemen_;
    std::vector<int> mslot_;
};

inline constexpr double kPiMassTol = 1e-12;
inline constexpr double kUniformTol = 1e-12;

inline ValidationReport validate(const TradingNetwork& net) {
    ValidationReport rep;
    auto add = [&rep](const std::string& s) { rep.violations.push_back(s); };

    for (const auto& n : net.nodes()) {
        if (!(n.population > 0)) add("node " + n.id + ": population must be positive");
        if (n.cls == NodeClass::Consumer) {
            if (!n.value) add("node " + n.id + ": consumer missing value");
            else if (*n.value < 0) add("node " + n.id + ": value must be non-negative");
        } else if (n.value) {
            add("node " + n.id + ": value only allowed on consumers");
        }
    }
    if (net.count(NodeClass::Producer) == 0) add("network has no producer");
    if (net.count(NodeClass::Consumer) == 0) add("network has no consumer");

    double mass = 0.0;
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        const Edge& ed = net.edges()[e];
        if (ed.cost < 0) add("edge " + ed.from + "->" + ed.to + ": cost must be non-negative");
        if (ed.pi < 0) add("edge " + ed.from + "->" + ed.to + ": pi must be non-negative");
        mass += ed.pi;
        if (net.edge_from(e) < 0) add("edge " + ed.from + "->" + ed.to + ": unknown node " + ed.from);
        if (net.edge_to(e) < 0) add("edge " + ed.from + "->" + ed.to + ": unknown node " + ed.to);
        if (net.edge_from(e) >= 0 && net.edge_to(e) >= 0 &&
            net.edge_class(e) == EdgeClass::Illegal)
            add("edge " + ed.from + "->" + ed.to + ": illegal edge class pair");
        if (e + 1 < net.edges().size() && net.edges()[e + 1].from == ed.from &&
            net.edges()[e + 1].to == ed.to)
            add("edge " + ed.from + "->" + ed.to + ": duplicate edge");
    }
    if (std::abs(mass - 1.0) > kPiMassTol) {
        std::ostringstream os;
        os << "matching distribution mass " << mass << " != 1";
        add(os.str());
    }

    const auto& d = net.discount();
    const auto& f = net.patience_f();
    if (d.has_value() == f.has_value()) {
        add("exactly one of discount or f must be given");
    } else if (d) {
        if (!(*d > 0.0 && *d < 1.0)) add("discount must lie in (0,1)");
    } else {
        if (!(*f > 0.0)) add("f must be positive");
        // The uniform patience parameterization only makes sense with equal
        // populations and a uniform matching distribution.
        if (!net.nodes().empty()) {
            double n0 = net.nodes()[0].population;
            for (const auto& n : net.nodes())
                if (std::abs(n.population - n0) > kUniformTol * std::max(1.0, n0))
                    add("f-mode requires equal populations");
            if (!net.edges().empty()) {
                double p0 = net.edges()[0].pi;
                for (const auto& ed : net.edges())
                    if (std::abs(ed.pi - p0) > kUniformTol)
                        add("f-mode requires uniform matching distribution");
            }
        }
    }
    return rep;
}

inline void require_valid(const TradingNetwork& net) {
    auto rep = validate(net);
    if (!rep.ok()) throw std::invalid_argument("invalid network:\n" + rep.to_string());
}

// kappa(e,v) = pi_e / (2 N_v ln(1/delta)): the coefficient multiplying the
// max{z,0} terms in the stationary payoff equations, from the perspective of
// node v at either end of edge e. In f-mode kappa is 1/f for every pair.
struct BellmanCoefficients {
    std::vector<double> at_from;  // per edge, perspective of the selling end
    std::vector<double> at_to;    // per edge, perspective of the buying end
    bool patient_limit = false;   // kappa effectively infinite (delta -> 1)
};

// Internal time parameter: t = ln(1/delta), or in f-mode the t that makes
// pi/(2 N t) equal 1/f under the (validated) uniform pi and N.
inline double time_parameter(const TradingNetwork& net) {
    if (net.discount()) {
        return std::log(1.0 / *net.discount());
    }
    if (!net.patience_f()) throw std::invalid_argument("network has neither discount nor f");
    double pi0 = net.edges().empty() ? 1.0 : net.edges()[0].pi;
    double n0 = net.nodes().empty() ? 1.0 : net.nodes()[0].population;
    return *net.patience_f() * pi0 / (2.0 * n0);
}

inline double kappa_at(const TradingNetwork& net, std::size_t e, int node, double t) {
    return net.edges()[e].pi / (2.0 * net.nodes()[node].population * t);
}

inline BellmanCoefficients coefficients(const TradingNetwork& net) {
    require_valid(net);
    double t = time_parameter(net);
    BellmanCoefficients out;
    out.at_from.resize(net.edges().size());
    out.at_to.resize(net.edges().size());
    double kmax = 0.0;
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        out.at_from[e] = kappa_at(net, e, net.edge_from(e), t);
        out.at_to[e] = kappa_at(net, e, net.edge_to(e), t);
        kmax = std::max({kmax, out.at_from[e], out.at_to[e]});
    }
    out.patient_limit = !(kmax < 1e12);
    return out;
}

}  // namespace midmarket

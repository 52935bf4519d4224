#pragma once

// The example networks from the figures, reproducible by name.

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "midmarket/network.hpp"

namespace midmarket {

// Two producers (1,2), two middlemen (3,4), two consumers (5,6); all costs 0,
// all values 1, uniform matching. Default patience f=1, meant to be overridden.
inline TradingNetwork network2(double f = 1.0) {
    std::vector<Node> nodes = {
        {"1", NodeClass::Producer, 1.0, std::nullopt},
        {"2", NodeClass::Producer, 1.0, std::nullopt},
        {"3", NodeClass::Middleman, 1.0, std::nullopt},
        {"4", NodeClass::Middleman, 1.0, std::nullopt},
        {"5", NodeClass::Consumer, 1.0, 1.0},
        {"6", NodeClass::Consumer, 1.0, 1.0},
    };
    const double p = 1.0 / 6.0;
    std::vector<Edge> edges = {
        {"1", "3", 0.0, p}, {"1", "4", 0.0, p}, {"2", "4", 0.0, p},
        {"3", "5", 0.0, p}, {"3", "6", 0.0, p}, {"4", "6", 0.0, p},
    };
    return TradingNetwork::with_patience(std::move(nodes), std::move(edges), f);
}

// Producer 1, consumer 2, middleman 3; direct link costs 1/2, both middleman
// links are free, V=1, uniform matching over the three links.
inline TradingNetwork triangle_halfcost(double f = 1.0) {
    std::vector<Node> nodes = {
        {"1", NodeClass::Producer, 1.0, std::nullopt},
        {"2", NodeClass::Consumer, 1.0, 1.0},
        {"3", NodeClass::Middleman, 1.0, std::nullopt},
    };
    const double p = 1.0 / 3.0;
    std::vector<Edge> edges = {
        {"1", "2", 0.5, p}, {"1", "3", 0.0, p}, {"3", "2", 0.0, p},
    };
    return TradingNetwork::with_patience(std::move(nodes), std::move(edges), f);
}

// Chain 1 -> 2 -> 3 with costs a, b, consumer value V and link probabilities
// pi12, pi23. Uniform probabilities keep the f parameterization available;
// otherwise the network carries a discount factor.
inline TradingNetwork two_hop(double a = 0.0, double b = 0.0, double V = 1.0,
                              double pi12 = 0.5, double pi23 = 0.5,
                              double delta = 0.9) {
    std::vector<Node> nodes = {
        {"1", NodeClass::Producer, 1.0, std::nullopt},
        {"2", NodeClass::Middleman, 1.0, std::nullopt},
        {"3", NodeClass::Consumer, 1.0, V},
    };
    std::vector<Edge> edges = {
        {"1", "2", a, pi12}, {"2", "3", b, pi23},
    };
    return TradingNetwork::with_discount_factor(std::move(nodes), std::move(edges), delta);
}

// Triangle of section 5.3: V=4, C12=3, C32=0, C13=4-x.
inline TradingNetwork surplus_triangle(double x, double f = 1.0) {
    std::vector<Node> nodes = {
        {"1", NodeClass::Producer, 1.0, std::nullopt},
        {"2", NodeClass::Consumer, 1.0, 4.0},
        {"3", NodeClass::Middleman, 1.0, std::nullopt},
    };
    const double p = 1.0 / 3.0;
    std::vector<Edge> edges = {
        {"1", "2", 3.0, p}, {"1", "3", 4.0 - x, p}, {"3", "2", 0.0, p},
    };
    return TradingNetwork::with_patience(std::move(nodes), std::move(edges), f);
}

namespace detail {
inline std::vector<double> parse_args(std::string_view s) {
    std::vector<double> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::stod(cur));
    return out;
}
}  // namespace detail

// Accepts "network2", "triangle-halfcost", "two-hop", "two-hop(a,b,V,pi12,pi23)"
// and "surplus-triangle(x)".
inline TradingNetwork builtin(std::string_view name) {
    std::string_view base = name;
    std::vector<double> args;
    if (auto p = name.find('('); p != std::string_view::npos) {
        if (name.back() != ')') throw std::invalid_argument("malformed builtin name: " + std::string(name));
        base = name.substr(0, p);
        args = detail::parse_args(name.substr(p + 1, name.size() - p - 2));
    }
    if (base == "network2") return network2();
    if (base == "triangle-halfcost") return triangle_halfcost();
    if (base == "two-hop") {
        if (args.empty()) return two_hop();
        if (args.size() != 5)
            throw std::invalid_argument("two-hop expects (a,b,V,pi12,pi23)");
        return two_hop(args[0], args[1], args[2], args[3], args[4]);
    }
    if (base == "surplus-triangle") {
        if (args.size() != 1) throw std::invalid_argument("surplus-triangle expects (x)");
        return surplus_triangle(args[0]);
    }
    throw std::invalid_argument("unknown builtin network: " + std::string(name));
}

}  // namespace midmarket

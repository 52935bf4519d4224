#pragma once

// Stationary payoff systems: the finite-delta equations, their large-market
// limit, and the exact patient (delta -> 1) limit.
//
// For a fixed support the payoff equations are linear in the per-edge surplus
// gaps z: active edges keep their max{z,0} terms as plain z, inactive and
// pinned edges drop them. We solve that |Active|-dimensional system, back the
// node payoffs out, and report post-hoc gaps for the dropped edges.
//
// In the patient limit ln(1/delta) -> 0 every active gap vanishes linearly,
// z_e = t * w_e with t = ln(1/delta). Substituting and letting t -> 0 turns
// the z-definitions on active edges into exact linear constraints on the
// scaled gaps w (the two-hop case of this system appears in closed form in
// the delay analysis); payoffs stay finite. No extrapolation is involved.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "midmarket/dynamics.hpp"
#include "midmarket/network.hpp"

namespace midmarket {

enum class Support : std::uint8_t { Active, Inactive, Pinned };

inline std::vector<Support> support_from(const TradePattern& pattern) {
    std::vector<Support> s(pattern.disp.size());
    for (std::size_t e = 0; e < pattern.disp.size(); ++e) {
        switch (pattern.disp[e]) {
            case Disposition::Always: s[e] = Support::Active; break;
            case Disposition::Never: s[e] = Support::Inactive; break;
            case Disposition::Mixed: s[e] = Support::Pinned; break;
        }
    }
    return s;
}

struct PayoffProfile {
    std::vector<double> u0, u1;    // per node
    std::vector<double> z;         // per edge; in patient mode active entries are ~0
    std::vector<double> z_scaled;  // active entries: gap slope w = z / ln(1/delta) in
                                   // patient mode (equal to z otherwise); others: z
    bool patient = false;
};

class SingularSupportError : public std::runtime_error {
public:
    explicit SingularSupportError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

struct LinearForm {
    Eigen::VectorXd coef;  // over active-edge unknowns
    double constant = 0.0;
};

struct Assembly {
    std::vector<int> active;            // edge indices with unknowns
    std::vector<LinearForm> u0, u1;     // per node
};

// Weight of edge e's term inside node v's payoff sum (the search-friction
// factor), given the market state. Degenerate middlemen contribute nothing
// anywhere.
inline bool term_weight(const TradingNetwork& net, const MarketState& state, std::size_t e,
                        int v, double* w) {
    int a = net.edge_from(e), b = net.edge_to(e);
    auto degenerate = [&](int n) {
        return net.nodes()[n].cls == NodeClass::Middleman &&
               state.degenerate[net.middleman_slot(n)];
    };
    if (degenerate(a) || degenerate(b)) return false;
    double weight = 1.0;
    const NodeClass cv = net.nodes()[v].cls;
    if (cv == NodeClass::Producer && net.nodes()[b].cls == NodeClass::Middleman)
        weight = 1.0 - state.of_node(net, b);
    else if (cv == NodeClass::Consumer && net.nodes()[a].cls == NodeClass::Middleman)
        weight = state.of_node(net, a);
    *w = weight;
    return true;
}

// coeff(e,v): the kappa-like prefactor of edge e's term in node v's sum.
template <typename Coeff>
inline Assembly assemble(const TradingNetwork& net, const MarketState& state,
                         const std::vector<Support>& support, Coeff&& coeff) {
    if (support.size() != net.edges().size())
        throw std::invalid_argument("support does not match network edge count");
    if (state.mu.size() != net.middlemen().size())
        throw std::invalid_argument("market state does not match network");
    Assembly as;
    for (std::size_t e = 0; e < support.size(); ++e)
        if (support[e] == Support::Active) as.active.push_back(static_cast<int>(e));
    const auto n_unknowns = static_cast<Eigen::Index>(as.active.size());
    const std::size_t n_nodes = net.nodes().size();
    as.u0.assign(n_nodes, {Eigen::VectorXd::Zero(n_unknowns), 0.0});
    as.u1.assign(n_nodes, {Eigen::VectorXd::Zero(n_unknowns), 0.0});

    for (std::size_t v = 0; v < n_nodes; ++v) {
        const Node& nd = net.nodes()[v];
        if (nd.cls == NodeClass::Consumer) as.u1[v].constant = nd.value.value_or(0.0);
        if (nd.cls == NodeClass::Middleman && state.degenerate[net.middleman_slot(v)])
            continue;  // u0 = u1 = 0 by convention
        for (std::size_t idx = 0; idx < as.active.size(); ++idx) {
            const auto e = static_cast<std::size_t>(as.active[idx]);
            double w;
            switch (nd.cls) {
                case NodeClass::Producer:
                    if (net.edge_from(e) == static_cast<int>(v) && term_weight(net, state, e, static_cast<int>(v), &w))
                        as.u1[v].coef[static_cast<Eigen::Index>(idx)] += coeff(e, static_cast<int>(v)) * w;
                    break;
                case NodeClass::Middleman:
                    if (net.edge_to(e) == static_cast<int>(v) && term_weight(net, state, e, static_cast<int>(v), &w))
                        as.u0[v].coef[static_cast<Eigen::Index>(idx)] += coeff(e, static_cast<int>(v)) * w;
                    if (net.edge_from(e) == static_cast<int>(v) && term_weight(net, state, e, static_cast<int>(v), &w))
                        as.u1[v].coef[static_cast<Eigen::Index>(idx)] += coeff(e, static_cast<int>(v)) * w;
                    break;
                case NodeClass::Consumer:
                    if (net.edge_to(e) == static_cast<int>(v) && term_weight(net, state, e, static_cast<int>(v), &w))
                        as.u0[v].coef[static_cast<Eigen::Index>(idx)] += coeff(e, static_cast<int>(v)) * w;
                    break;
            }
        }
    }
    return as;
}

inline Eigen::VectorXd solve_square(const TradingNetwork& net, const Assembly& as,
                                    const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    if (lu.rank() < A.rows()) {
        Eigen::MatrixXd kernel = lu.kernel();
        std::ostringstream os;
        os << "indeterminate support: gaps on edges {";
        bool first = true;
        for (Eigen::Index i = 0; i < kernel.rows(); ++i)
            if (kernel.row(i).cwiseAbs().maxCoeff() > 1e-8) {
                const Edge& ed = net.edges()[static_cast<std::size_t>(as.active[static_cast<std::size_t>(i)])];
                os << (first ? "" : ", ") << ed.from << "->" << ed.to;
                first = false;
            }
        os << "} form a dependent equation set";
        throw SingularSupportError(os.str());
    }
    return lu.solve(b);
}

inline PayoffProfile profile_from(const TradingNetwork& net, const Assembly& as,
                                  const Eigen::VectorXd& x, double dhat, bool patient) {
    PayoffProfile p;
    p.patient = patient;
    const std::size_t n_nodes = net.nodes().size();
    p.u0.resize(n_nodes);
    p.u1.resize(n_nodes);
    for (std::size_t v = 0; v < n_nodes; ++v) {
        p.u0[v] = as.u0[v].coef.dot(x) + as.u0[v].constant;
        p.u1[v] = as.u1[v].coef.dot(x) + as.u1[v].constant;
    }
    p.z.resize(net.edges().size());
    p.z_scaled.resize(net.edges().size());
    std::vector<char> is_active(net.edges().size(), 0);
    for (std::size_t idx = 0; idx < as.active.size(); ++idx)
        is_active[static_cast<std::size_t>(as.active[idx])] = 1;
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        int i = net.edge_from(e), j = net.edge_to(e);
        double du = (p.u1[j] - p.u0[j]) - (p.u1[i] - p.u0[i]);
        p.z[e] = dhat * du - net.edges()[e].cost;
        p.z_scaled[e] = p.z[e];
    }
    if (patient) {
        for (std::size_t idx = 0; idx < as.active.size(); ++idx) {
            const auto e = static_cast<std::size_t>(as.active[idx]);
            p.z_scaled[e] = x[static_cast<Eigen::Index>(idx)];
        }
    }
    return p;
}

// Solve the z-system at coefficient scale coeff(e,v) and discount factor dhat
// inside the gap definition.
template <typename Coeff>
inline PayoffProfile solve_gaps(const TradingNetwork& net, const MarketState& state,
                                const std::vector<Support>& support, Coeff&& coeff,
                                double dhat) {
    Assembly as = assemble(net, state, support, coeff);
    const auto n = static_cast<Eigen::Index>(as.active.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto e = static_cast<std::size_t>(as.active[static_cast<std::size_t>(r)]);
        int i = net.edge_from(e), j = net.edge_to(e);
        Eigen::VectorXd du = as.u1[j].coef - as.u0[j].coef - as.u1[i].coef + as.u0[i].coef;
        double duc = as.u1[j].constant - as.u0[j].constant - as.u1[i].constant + as.u0[i].constant;
        A.row(r) = -dhat * du.transpose();
        A(r, r) += 1.0;
        b[r] = dhat * duc - net.edges()[e].cost;
    }
    Eigen::VectorXd z = (n == 0) ? Eigen::VectorXd() : solve_square(net, as, A, b);
    return profile_from(net, as, z, dhat, /*patient=*/false);
}

}  // namespace detail

// Large-market limit system at an explicit time parameter t = ln(1/delta).
inline PayoffProfile solve_limit_at(const TradingNetwork& net, const MarketState& state,
                                    const std::vector<Support>& support, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("time parameter must be positive");
    return detail::solve_gaps(
        net, state, support,
        [&](std::size_t e, int v) { return kappa_at(net, e, v, t); }, 1.0);
}

inline PayoffProfile solve_limit(const TradingNetwork& net, const MarketState& state,
                                 const std::vector<Support>& support) {
    return solve_limit_at(net, state, support, time_parameter(net));
}

// Finite-delta system of the k-th replication: coefficients
// pi/(2 k N (1 - delta^{1/k})) and a delta^{1/k} factor inside the gaps.
inline PayoffProfile solve_finite(const TradingNetwork& net, const MarketState& state,
                                  const std::vector<Support>& support, std::int64_t k) {
    if (k < 1) throw std::invalid_argument("replication index k must be >= 1");
    if (!net.discount())
        throw std::invalid_argument("finite-delta solve requires a discount factor, not f");
    const double delta = *net.discount();
    const double dhat = std::pow(delta, 1.0 / static_cast<double>(k));
    const double denom = 2.0 * static_cast<double>(k) * (1.0 - dhat);
    return detail::solve_gaps(
        net, state, support,
        [&](std::size_t e, int v) {
            return net.edges()[e].pi / (denom * net.nodes()[v].population);
        },
        dhat);
}

// Exact patient limit: unknowns are the scaled gaps w_e on active edges, and
// each active gap definition degenerates to the constraint du = C_e.
inline PayoffProfile solve_patient(const TradingNetwork& net, const MarketState& state,
                                   const std::vector<Support>& support) {
    auto coeff = [&](std::size_t e, int v) {
        return net.edges()[e].pi / (2.0 * net.nodes()[v].population);
    };
    detail::Assembly as = detail::assemble(net, state, support, coeff);
    const auto n = static_cast<Eigen::Index>(as.active.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto e = static_cast<std::size_t>(as.active[static_cast<std::size_t>(r)]);
        int i = net.edge_from(e), j = net.edge_to(e);
        A.row(r) = (as.u1[j].coef - as.u0[j].coef - as.u1[i].coef + as.u0[i].coef).transpose();
        double duc = as.u1[j].constant - as.u0[j].constant - as.u1[i].constant + as.u0[i].constant;
        b[r] = net.edges()[e].cost - duc;
    }
    Eigen::VectorXd w = (n == 0) ? Eigen::VectorXd() : detail::solve_square(net, as, A, b);
    return detail::profile_from(net, as, w, 1.0, /*patient=*/true);
}

struct SignViolation {
    int edge;
    Support support;
    double z;
    std::string describe(const TradingNetwork& net) const {
        const Edge& ed = net.edges()[static_cast<std::size_t>(edge)];
        std::ostringstream os;
        os << ed.from << "->" << ed.to << ": ";
        switch (support) {
            case Support::Active: os << "active gap negative (" << z << ")"; break;
            case Support::Inactive: os << "inactive gain positive (" << z << ")"; break;
            case Support::Pinned: os << "pinned gap nonzero (" << z << ")"; break;
        }
        return os.str();
    }
};

struct SignReport {
    std::vector<SignViolation> violations;
    bool ok() const { return violations.empty(); }
};

inline constexpr double kSignTol = 1e-9;

// Active edges must carry a non-negative gap (the scaled gap in patient
// mode), inactive edges a non-positive post-hoc gain, pinned edges a zero one.
inline SignReport check_signs(const PayoffProfile& profile, const std::vector<Support>& support,
                              double tol = kSignTol) {
    SignReport rep;
    for (std::size_t e = 0; e < support.size(); ++e) {
        switch (support[e]) {
            case Support::Active:
                if (profile.z_scaled[e] < -tol)
                    rep.violations.push_back({static_cast<int>(e), support[e], profile.z_scaled[e]});
                break;
            case Support::Inactive:
                if (profile.z[e] > tol)
                    rep.violations.push_back({static_cast<int>(e), support[e], profile.z[e]});
                break;
            case Support::Pinned:
                if (std::abs(profile.z[e]) > tol)
                    rep.violations.push_back({static_cast<int>(e), support[e], profile.z[e]});
                break;
        }
    }
    return rep;
}

}  // namespace midmarket

#pragma once

// Stationary market state and the fluid limit of the inventory process.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "midmarket/network.hpp"

namespace midmarket {

enum class Disposition : std::uint8_t { Always, Never, Mixed };

inline const char* to_string(Disposition d) {
    switch (d) {
        case Disposition::Always: return "always";
        case Disposition::Never: return "never";
        case Disposition::Mixed: return "mixed";
    }
    return "?";
}

struct TradePattern {
    std::vector<Disposition> disp;  // per edge, canonical edge order
    std::vector<double> lambda;     // 1 for Always, 0 for Never, (0,1) for Mixed

    static TradePattern always(std::size_t n_edges) {
        return {std::vector<Disposition>(n_edges, Disposition::Always),
                std::vector<double>(n_edges, 1.0)};
    }
    static TradePattern never(std::size_t n_edges) {
        return {std::vector<Disposition>(n_edges, Disposition::Never),
                std::vector<double>(n_edges, 0.0)};
    }

    void set_always(std::size_t e) { disp[e] = Disposition::Always; lambda[e] = 1.0; }
    void set_never(std::size_t e) { disp[e] = Disposition::Never; lambda[e] = 0.0; }
    void set_mixed(std::size_t e, double lam) {
        if (!(lam > 0.0 && lam < 1.0))
            throw std::invalid_argument("mixed trade probability must lie strictly inside (0,1)");
        disp[e] = Disposition::Mixed;
        lambda[e] = lam;
    }

    bool operator==(const TradePattern& o) const { return disp == o.disp && lambda == o.lambda; }
};

struct MarketState {
    std::vector<double> mu;            // per middleman slot
    std::vector<std::uint8_t> degenerate;  // zero inflow and zero outflow

    // mu seen from a node index: producers hold with probability 1, consumers 0.
    double of_node(const TradingNetwork& net, int node) const {
        switch (net.nodes()[node].cls) {
            case NodeClass::Producer: return 1.0;
            case NodeClass::Consumer: return 0.0;
            case NodeClass::Middleman: return mu[net.middleman_slot(node)];
        }
        return 0.0;
    }
};

namespace detail {
inline void check_pattern(const TradingNetwork& net, const TradePattern& p) {
    if (p.disp.size() != net.edges().size() || p.lambda.size() != net.edges().size())
        throw std::invalid_argument("trade pattern does not match network edge count");
}

inline double inflow_rate(const TradingNetwork& net, const TradePattern& p, int m) {
    double s = 0.0;
    for (int e : net.in_edges(m)) s += net.edges()[e].pi * p.lambda[e];
    return s;
}
inline double outflow_rate(const TradingNetwork& net, const TradePattern& p, int m) {
    double s = 0.0;
    for (int e : net.out_edges(m)) s += net.edges()[e].pi * p.lambda[e];
    return s;
}
}  // namespace detail

// Unique steady state of the inventory dynamics: mu_m is the ratio of the
// lambda-weighted inflow mass to total turnover mass. Middlemen with no flow
// at all get mu=0 by convention and are flagged degenerate.
inline MarketState steady_state(const TradingNetwork& net, const std::vector<double>& lambda) {
    if (lambda.size() != net.edges().size())
        throw std::invalid_argument("lambda vector does not match network edge count");
    MarketState st;
    st.mu.reserve(net.middlemen().size());
    st.degenerate.reserve(net.middlemen().size());
    for (int m : net.middlemen()) {
        double in = 0.0, out = 0.0;
        for (int e : net.in_edges(m)) in += net.edges()[e].pi * lambda[e];
        for (int e : net.out_edges(m)) out += net.edges()[e].pi * lambda[e];
        if (in + out == 0.0) {
            st.mu.push_back(0.0);
            st.degenerate.push_back(1);
        } else {
            st.mu.push_back(in / (in + out));
            st.degenerate.push_back(0);
        }
    }
    return st;
}

inline MarketState steady_state(const TradingNetwork& net, const TradePattern& pattern) {
    detail::check_pattern(net, pattern);
    return steady_state(net, pattern.lambda);
}

// Signed balance residual per middleman: outflow minus inflow of goods,
// with mu_p = 1 and mu_c = 0 substituted. Zero at the steady state.
inline std::vector<double> balance_residual(const TradingNetwork& net, const TradePattern& pattern,
                                            const MarketState& state) {
    detail::check_pattern(net, pattern);
    if (state.mu.size() != net.middlemen().size())
        throw std::invalid_argument("market state does not match network");
    std::vector<double> res;
    res.reserve(net.middlemen().size());
    for (std::size_t s = 0; s < net.middlemen().size(); ++s) {
        int m = net.middlemen()[s];
        double mu = state.mu[s];
        double out = 0.0, in = 0.0;
        for (int e : net.out_edges(m))
            out += net.edges()[e].pi * mu * (1.0 - state.of_node(net, net.edge_to(e))) * pattern.lambda[e];
        for (int e : net.in_edges(m))
            in += net.edges()[e].pi * state.of_node(net, net.edge_from(e)) * (1.0 - mu) * pattern.lambda[e];
        res.push_back(out - in);
    }
    return res;
}

struct FluidTrajectory {
    std::vector<double> time;                 // fluid-time grid
    std::vector<std::vector<double>> frac;    // [step][middleman slot], x_m(t)/N_m
    double terminal_residual = 0.0;           // max |frac(T) - mu|
};

// Fixed-step RK4 on the decoupled linear stock ODE, in fraction coordinates:
//   y_m' = ((1-y_m) * inflow_m - y_m * outflow_m) / N_m.
inline FluidTrajectory fluid_integrate(const TradingNetwork& net, const TradePattern& pattern,
                                       std::vector<double> initial_frac, double horizon,
                                       double step) {
    detail::check_pattern(net, pattern);
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    const auto& mids = net.middlemen();
    if (initial_frac.size() != mids.size())
        throw std::invalid_argument("initial fractions do not match middleman count");
    for (double y : initial_frac)
        if (y < 0.0 || y > 1.0) throw std::invalid_argument("initial fractions must lie in [0,1]");

    std::vector<double> in(mids.size()), out(mids.size()), nn(mids.size());
    for (std::size_t s = 0; s < mids.size(); ++s) {
        in[s] = detail::inflow_rate(net, pattern, mids[s]);
        out[s] = detail::outflow_rate(net, pattern, mids[s]);
        nn[s] = net.nodes()[mids[s]].population;
    }
    auto deriv = [&](double y, std::size_t s) { return ((1.0 - y) * in[s] - y * out[s]) / nn[s]; };

    FluidTrajectory traj;
    auto nsteps = static_cast<std::size_t>(std::ceil(horizon / step));
    traj.time.reserve(nsteps + 1);
    traj.frac.reserve(nsteps + 1);
    std::vector<double> y = std::move(initial_frac);
    traj.time.push_back(0.0);
    traj.frac.push_back(y);
    for (std::size_t i = 0; i < nsteps; ++i) {
        double h = std::min(step, horizon - static_cast<double>(i) * step);
        for (std::size_t s = 0; s < y.size(); ++s) {
            double k1 = deriv(y[s], s);
            double k2 = deriv(y[s] + 0.5 * h * k1, s);
            double k3 = deriv(y[s] + 0.5 * h * k2, s);
            double k4 = deriv(y[s] + h * k3, s);
            y[s] += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        traj.time.push_back(std::min(static_cast<double>(i + 1) * step, horizon));
        traj.frac.push_back(y);
    }
    MarketState mu = steady_state(net, pattern);
    double r = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) r = std::max(r, std::abs(y[s] - mu.mu[s]));
    traj.terminal_residual = r;
    return traj;
}

inline void write_csv(const FluidTrajectory& traj, const TradingNetwork& net, std::ostream& os) {
    os << "t";
    for (int m : net.middlemen()) os << ',' << net.nodes()[m].id;
    os << '\n';
    for (std::size_t i = 0; i < traj.time.size(); ++i) {
        os << traj.time[i];
        for (double v : traj.frac[i]) os << ',' << v;
        os << '\n';
    }
}

}  // namespace midmarket

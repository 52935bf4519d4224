#pragma once

// Finite-population Monte Carlo of the bargaining game's inventory process
// and of realized discounted payoffs, used to validate the fluid limit and
// the finite-delta payoff equations empirically.
//
// Inventory is simulated on aggregate counts (agents at a node are
// exchangeable); payoff estimation tracks individual agents because entry
// times and per-agent cash flows matter there. Replicas run on independent
// SplitMix64 streams and are reduced in fixed replica order, so results are
// reproducible bit-for-bit regardless of thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "midmarket/dynamics.hpp"
#include "midmarket/network.hpp"
#include "midmarket/parallel.hpp"
#include "midmarket/payoffs.hpp"
#include "midmarket/rng.hpp"

namespace midmarket {

struct SimConfig {
    std::int64_t k = 1;           // replication factor
    std::int64_t periods = 1000000;
    std::int64_t burn_in = 100000;
    std::uint64_t seed = 0;
    int replicas = 4;
    enum class InitStock : std::uint8_t { Stationary, Empty, Full };
    InitStock init = InitStock::Stationary;
    unsigned threads = 0;
    std::int64_t trace_every = 0;  // >0: record replica 0's occupancy every so many periods
};

namespace detail {

inline void check_sim_config(const SimConfig& cfg) {
    if (cfg.k < 1) throw std::invalid_argument("replication factor k must be >= 1");
    if (cfg.periods <= 0) throw std::invalid_argument("periods must be positive");
    if (cfg.burn_in < 0 || cfg.burn_in >= cfg.periods)
        throw std::invalid_argument("burn-in must be smaller than the horizon");
    if (cfg.replicas < 1) throw std::invalid_argument("at least one replica required");
}

inline std::int64_t integer_population(const TradingNetwork& net, std::size_t node,
                                       std::int64_t k) {
    double scaled = net.nodes()[node].population * static_cast<double>(k);
    auto rounded = static_cast<std::int64_t>(std::llround(scaled));
    if (std::abs(scaled - static_cast<double>(rounded)) > 1e-9 || rounded < 1)
        throw std::invalid_argument("non-integer population k*N at node " + net.nodes()[node].id);
    return rounded;
}

struct EdgeDraw {
    std::vector<double> cum;  // cumulative pi
    int sample(SplitMix64& rng) const {
        double u = rng.uniform01();
        auto it = std::lower_bound(cum.begin(), cum.end(), u);
        if (it == cum.end()) return static_cast<int>(cum.size()) - 1;
        return static_cast<int>(it - cum.begin());
    }
};

inline EdgeDraw edge_draw(const TradingNetwork& net) {
    EdgeDraw d;
    double acc = 0.0;
    for (const auto& e : net.edges()) {
        acc += e.pi;
        d.cum.push_back(acc);
    }
    return d;
}

}  // namespace detail

struct OccupancyEstimate {
    struct PerMiddleman {
        std::string node;
        double mean = 0.0;      // time-averaged holding fraction
        double stderr_ = 0.0;   // standard error of the mean (batch means)
        double mu = 0.0;        // analytic steady state
        double rms_dev = 0.0;   // root mean square of frac - mu (point-mass convergence)
        double rms_stderr = 0.0;
        std::int64_t samples = 0;
    };
    std::vector<PerMiddleman> mids;
    // decimated occupancy trace of replica 0, when requested
    std::vector<std::int64_t> trace_t;
    std::vector<std::vector<double>> trace;  // [row][middleman slot]
};

// Exact simulation of the per-middleman birth-death inventory chain.
inline OccupancyEstimate simulate_inventory(const TradingNetwork& net, const TradePattern& pattern,
                                            const SimConfig& cfg) {
    require_valid(net);
    detail::check_pattern(net, pattern);
    detail::check_sim_config(cfg);
    const auto& mids = net.middlemen();
    std::vector<std::int64_t> cap(mids.size());
    for (std::size_t s = 0; s < mids.size(); ++s)
        cap[s] = detail::integer_population(net, static_cast<std::size_t>(mids[s]), cfg.k);
    for (std::size_t v = 0; v < net.nodes().size(); ++v)
        detail::integer_population(net, v, cfg.k);  // validate every node

    MarketState mu = steady_state(net, pattern);
    detail::EdgeDraw draw = detail::edge_draw(net);

    constexpr int kBatches = 16;
    struct Replica {
        std::vector<double> mean, msd;                  // per mid
        std::vector<std::vector<double>> batch_means;   // [mid][batch]
        std::vector<std::vector<double>> batch_msds;    // [mid][batch]
        std::int64_t samples = 0;
        std::vector<std::int64_t> trace_t;
        std::vector<std::vector<double>> trace;
    };
    std::vector<Replica> reps(static_cast<std::size_t>(cfg.replicas));

    parallel_for(
        static_cast<std::size_t>(cfg.replicas),
        [&](std::size_t r) {
            SplitMix64 rng(split_stream(cfg.seed, r));
            std::vector<std::int64_t> x(mids.size());
            for (std::size_t s = 0; s < mids.size(); ++s) {
                switch (cfg.init) {
                    case SimConfig::InitStock::Stationary:
                        x[s] = static_cast<std::int64_t>(std::llround(mu.mu[s] * static_cast<double>(cap[s])));
                        break;
                    case SimConfig::InitStock::Empty: x[s] = 0; break;
                    case SimConfig::InitStock::Full: x[s] = cap[s]; break;
                }
            }
            const std::int64_t span = cfg.periods - cfg.burn_in;
            const std::int64_t batch_len = std::max<std::int64_t>(1, span / kBatches);
            Replica rep;
            rep.mean.assign(mids.size(), 0.0);
            rep.msd.assign(mids.size(), 0.0);
            rep.batch_means.assign(mids.size(), std::vector<double>());
            rep.batch_msds.assign(mids.size(), std::vector<double>());
            std::vector<double> batch_acc(mids.size(), 0.0), batch_sq(mids.size(), 0.0);
            std::int64_t batch_n = 0;
            for (std::int64_t t = 0; t < cfg.periods; ++t) {
                if (cfg.trace_every > 0 && r == 0 && t % cfg.trace_every == 0) {
                    rep.trace_t.push_back(t);
                    std::vector<double> row(mids.size());
                    for (std::size_t s = 0; s < mids.size(); ++s)
                        row[s] = static_cast<double>(x[s]) / static_cast<double>(cap[s]);
                    rep.trace.push_back(std::move(row));
                }
                int e = draw.sample(rng);
                double lam = pattern.lambda[static_cast<std::size_t>(e)];
                if (lam > 0.0) {
                    switch (net.edge_class(static_cast<std::size_t>(e))) {
                        case EdgeClass::ProducerMiddleman: {
                            int s = net.middleman_slot(net.edge_to(e));
                            double frac = static_cast<double>(x[static_cast<std::size_t>(s)]) /
                                          static_cast<double>(cap[static_cast<std::size_t>(s)]);
                            if (rng.uniform01() < (1.0 - frac) * lam)
                                x[static_cast<std::size_t>(s)] =
                                    std::min(cap[static_cast<std::size_t>(s)], x[static_cast<std::size_t>(s)] + 1);
                            break;
                        }
                        case EdgeClass::MiddlemanConsumer: {
                            int s = net.middleman_slot(net.edge_from(e));
                            double frac = static_cast<double>(x[static_cast<std::size_t>(s)]) /
                                          static_cast<double>(cap[static_cast<std::size_t>(s)]);
                            if (rng.uniform01() < frac * lam)
                                x[static_cast<std::size_t>(s)] =
                                    std::max<std::int64_t>(0, x[static_cast<std::size_t>(s)] - 1);
                            break;
                        }
                        default: break;  // direct producer-consumer trades do not move stock
                    }
                }
                if (t >= cfg.burn_in) {
                    for (std::size_t s = 0; s < mids.size(); ++s) {
                        double frac = static_cast<double>(x[s]) / static_cast<double>(cap[s]);
                        rep.mean[s] += frac;
                        double d = frac - mu.mu[s];
                        rep.msd[s] += d * d;
                        batch_acc[s] += frac;
                        batch_sq[s] += d * d;
                    }
                    ++rep.samples;
                    if (++batch_n == batch_len) {
                        for (std::size_t s = 0; s < mids.size(); ++s) {
                            rep.batch_means[s].push_back(batch_acc[s] / static_cast<double>(batch_n));
                            rep.batch_msds[s].push_back(batch_sq[s] / static_cast<double>(batch_n));
                            batch_acc[s] = 0.0;
                            batch_sq[s] = 0.0;
                        }
                        batch_n = 0;
                    }
                }
            }
            for (std::size_t s = 0; s < mids.size(); ++s) {
                rep.mean[s] /= static_cast<double>(rep.samples);
                rep.msd[s] /= static_cast<double>(rep.samples);
            }
            reps[r] = std::move(rep);
        },
        cfg.threads);

    OccupancyEstimate out;
    out.trace_t = std::move(reps[0].trace_t);
    out.trace = std::move(reps[0].trace);
    for (std::size_t s = 0; s < mids.size(); ++s) {
        OccupancyEstimate::PerMiddleman pm;
        pm.node = net.nodes()[mids[s]].id;
        pm.mu = mu.mu[s];
        std::vector<double> batches, sq_batches;
        double mean = 0.0, msd = 0.0;
        std::int64_t n = 0;
        for (const auto& rep : reps) {
            mean += rep.mean[s];
            msd += rep.msd[s];
            n += rep.samples;
            for (double b : rep.batch_means[s]) batches.push_back(b);
            for (double b : rep.batch_msds[s]) sq_batches.push_back(b);
        }
        mean /= static_cast<double>(reps.size());
        msd /= static_cast<double>(reps.size());
        pm.mean = mean;
        pm.rms_dev = std::sqrt(msd);
        pm.samples = n;
        auto batch_se = [](const std::vector<double>& b) {
            double m = 0.0;
            for (double v : b) m += v;
            m /= static_cast<double>(b.size());
            double var = 0.0;
            for (double v : b) var += (v - m) * (v - m);
            var /= static_cast<double>(b.size() - 1);
            return std::sqrt(var / static_cast<double>(b.size()));
        };
        if (batches.size() >= 2) {
            pm.stderr_ = batch_se(batches);
            // delta method: se(sqrt(m)) = se(m) / (2 sqrt(m))
            double se_msd = batch_se(sq_batches);
            pm.rms_stderr = pm.rms_dev > 0.0 ? se_msd / (2.0 * pm.rms_dev) : 0.0;
        }
        out.mids.push_back(std::move(pm));
    }
    return out;
}

inline void write_trace_csv(const OccupancyEstimate& est, const TradingNetwork& net,
                            std::ostream& os) {
    os << "t";
    for (int m : net.middlemen()) os << ',' << net.nodes()[m].id;
    os << '\n';
    for (std::size_t i = 0; i < est.trace_t.size(); ++i) {
        os << est.trace_t[i];
        for (double v : est.trace[i]) os << ',' << v;
        os << '\n';
    }
}

struct SweepRow {
    std::int64_t k;
    std::string node;
    double estimate;
    double stderr_;
    double mu;
    double deviation;      // rms deviation from mu
    double dev_stderr;
};

inline std::vector<SweepRow> convergence_sweep(const TradingNetwork& net,
                                               const TradePattern& pattern,
                                               const std::vector<std::int64_t>& k_list,
                                               SimConfig cfg) {
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (k_list[i] <= k_list[i - 1])
            throw std::invalid_argument("k list must be strictly ascending");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        cfg.k = k_list[i];
        cfg.seed = split_stream(cfg.seed, 0x5eedull + i);  // fresh stream per k
        OccupancyEstimate est = simulate_inventory(net, pattern, cfg);
        for (const auto& pm : est.mids)
            rows.push_back({k_list[i], pm.node, pm.mean, pm.stderr_, pm.mu, pm.rms_dev,
                            pm.rms_stderr});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Empirical discounted payoffs. Prices follow the take-it-or-leave-it rule:
// the proposer demands the responder's discounted payoff difference, taken
// from the analytic finite-delta profile, and pays the transaction cost.

struct PayoffEstimate {
    struct PerNode {
        std::string node;
        double u0 = 0.0, u0_ci = 0.0;  // 95% half-width across replicas
        double u1 = 0.0, u1_ci = 0.0;
        std::int64_t n0 = 0, n1 = 0;
        bool u0_estimated = false, u1_estimated = false;
    };
    std::vector<PerNode> nodes;
    PayoffProfile analytic;  // the solve_finite profile used for pricing
};

inline PayoffEstimate estimate_payoffs(const TradingNetwork& net, const TradePattern& pattern,
                                       const SimConfig& cfg) {
    require_valid(net);
    detail::check_pattern(net, pattern);
    detail::check_sim_config(cfg);
    if (!net.discount())
        throw std::invalid_argument("estimate_payoffs requires a discount factor, not f");
    if (cfg.replicas < 2)
        throw std::invalid_argument("estimate_payoffs needs >= 2 replicas for confidence intervals");

    const double delta = *net.discount();
    const double dhat = std::pow(delta, 1.0 / static_cast<double>(cfg.k));
    MarketState state = steady_state(net, pattern);
    PayoffProfile prof = solve_finite(net, state, support_from(pattern), cfg.k);

    const std::size_t nv = net.nodes().size();
    std::vector<std::int64_t> pop(nv);
    for (std::size_t v = 0; v < nv; ++v) pop[v] = detail::integer_population(net, v, cfg.k);

    // window after which a discounted tail is negligible (delta_hat^tail <= 1e-9)
    const double per_period = std::log(1.0 / dhat);
    auto tail = static_cast<std::int64_t>(std::ceil(std::log(1e9) / per_period));
    if (cfg.burn_in + tail >= cfg.periods)
        throw std::invalid_argument("horizon too short for the discount tail window (need > " +
                                    std::to_string(cfg.burn_in + tail) + " periods)");
    const std::int64_t window_end = cfg.periods - tail;

    // per-edge prices: proposer side demands dhat * (responder u1 - u0)
    std::vector<double> seller_price(net.edges().size()), buyer_price(net.edges().size());
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        int i = net.edge_from(e), j = net.edge_to(e);
        seller_price[e] = dhat * (prof.u1[j] - prof.u0[j]);  // seller proposes
        buyer_price[e] = dhat * (prof.u1[i] - prof.u0[i]);   // buyer proposes
    }

    detail::EdgeDraw draw = detail::edge_draw(net);

    struct Event {
        std::int64_t t;
        double cash;
        bool buys;
    };
    struct ReplicaOut {
        // short-lived agents: discounted lifetime payoff sums and entry counts
        std::vector<double> life_sum;
        std::vector<std::int64_t> life_n;
        // middlemen: anchor-averaged state values
        std::vector<double> v0_sum, v1_sum;
        std::vector<std::int64_t> v0_n, v1_n;
    };
    std::vector<ReplicaOut> reps(static_cast<std::size_t>(cfg.replicas));

    parallel_for(
        static_cast<std::size_t>(cfg.replicas),
        [&](std::size_t r) {
            SplitMix64 rng(split_stream(cfg.seed, 0xE57ull + r));
            ReplicaOut out;
            out.life_sum.assign(nv, 0.0);
            out.life_n.assign(nv, 0);
            out.v0_sum.assign(nv, 0.0);
            out.v1_sum.assign(nv, 0.0);
            out.v0_n.assign(nv, 0);
            out.v1_n.assign(nv, 0);

            // middleman agent state and event logs
            std::vector<std::vector<std::uint8_t>> holds(nv);
            std::vector<std::vector<std::vector<Event>>> events(nv);
            std::vector<std::vector<std::uint8_t>> init_hold(nv);
            // short-lived agent entry times (negative once consumed)
            std::vector<std::vector<std::int64_t>> entry(nv);
            for (std::size_t v = 0; v < nv; ++v) {
                auto n = static_cast<std::size_t>(pop[v]);
                if (net.nodes()[v].cls == NodeClass::Middleman) {
                    holds[v].assign(n, 0);
                    int slot = net.middleman_slot(static_cast<int>(v));
                    auto start = static_cast<std::size_t>(
                        std::llround(state.mu[static_cast<std::size_t>(slot)] * static_cast<double>(n)));
                    for (std::size_t a = 0; a < start; ++a) holds[v][a] = 1;
                    init_hold[v] = holds[v];
                    events[v].assign(n, {});
                } else {
                    entry[v].assign(n, 0);
                }
            }

            auto record_lifetime = [&](std::size_t v, std::int64_t t0, double pay, std::int64_t t) {
                if (t0 >= cfg.burn_in && t0 < window_end)
                    out.life_sum[v] += pay * std::pow(dhat, static_cast<double>(t - t0));
            };
            auto count_entry = [&](std::size_t v, std::int64_t t0) {
                if (t0 >= cfg.burn_in && t0 < window_end) ++out.life_n[v];
            };

            for (std::int64_t t = 0; t < cfg.periods; ++t) {
                int e = draw.sample(rng);
                const auto eu = static_cast<std::size_t>(e);
                int i = net.edge_from(e), j = net.edge_to(e);
                const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
                std::uint64_t ai = rng.below(static_cast<std::uint64_t>(pop[iu]));
                std::uint64_t aj = rng.below(static_cast<std::uint64_t>(pop[ju]));
                bool seller_proposes = rng.uniform01() < 0.5;
                // feasibility: seller end must hold, buyer end must not
                if (net.nodes()[iu].cls == NodeClass::Middleman && !holds[iu][ai]) continue;
                if (net.nodes()[ju].cls == NodeClass::Middleman && holds[ju][aj]) continue;
                double lam = pattern.lambda[eu];
                if (lam <= 0.0) continue;
                if (lam < 1.0 && rng.uniform01() >= lam) continue;

                const double cost = net.edges()[eu].cost;
                const double price = seller_proposes ? seller_price[eu] : buyer_price[eu];
                const double seller_cash = price - (seller_proposes ? cost : 0.0);
                const double buyer_cash = -price - (seller_proposes ? 0.0 : cost);

                // seller side
                if (net.nodes()[iu].cls == NodeClass::Producer) {
                    record_lifetime(iu, entry[iu][ai], seller_cash, t);
                    entry[iu][ai] = t + 1;  // replaced by a clone next period
                    count_entry(iu, t + 1);
                } else {
                    events[iu][ai].push_back({t, seller_cash, false});
                    holds[iu][ai] = 0;
                }
                // buyer side
                if (net.nodes()[ju].cls == NodeClass::Consumer) {
                    double value = net.nodes()[ju].value.value_or(0.0);
                    record_lifetime(ju, entry[ju][aj], value + buyer_cash, t);
                    entry[ju][aj] = t + 1;
                    count_entry(ju, t + 1);
                } else {
                    events[ju][aj].push_back({t, buyer_cash, true});
                    holds[ju][aj] = 1;
                }
            }

            // anchor-based state values for middlemen
            const std::int64_t anchor_step =
                std::max<std::int64_t>(1, (window_end - cfg.burn_in) / 2000);
            for (std::size_t v = 0; v < nv; ++v) {
                if (net.nodes()[v].cls != NodeClass::Middleman) continue;
                for (std::size_t a = 0; a < events[v].size(); ++a) {
                    const auto& evs = events[v][a];
                    std::vector<double> suffix(evs.size() + 1, 0.0);
                    for (std::size_t idx = evs.size(); idx-- > 0;) {
                        double nxt = idx + 1 < evs.size()
                                         ? suffix[idx + 1] * std::pow(dhat, static_cast<double>(
                                                                                evs[idx + 1].t - evs[idx].t))
                                         : 0.0;
                        suffix[idx] = evs[idx].cash + nxt;
                    }
                    std::size_t ptr = 0;
                    for (std::int64_t anc = cfg.burn_in; anc < window_end; anc += anchor_step) {
                        while (ptr < evs.size() && evs[ptr].t < anc) ++ptr;
                        bool holding = ptr == 0 ? init_hold[v][a] != 0 : evs[ptr - 1].buys;
                        double val = ptr < evs.size()
                                         ? suffix[ptr] * std::pow(dhat, static_cast<double>(evs[ptr].t - anc))
                                         : 0.0;
                        if (holding) {
                            out.v1_sum[v] += val;
                            ++out.v1_n[v];
                        } else {
                            out.v0_sum[v] += val;
                            ++out.v0_n[v];
                        }
                    }
                }
            }
            reps[r] = std::move(out);
        },
        cfg.threads);

    PayoffEstimate est;
    est.analytic = prof;
    auto ci_of = [&](auto per_replica_mean) {
        std::vector<double> m;
        for (std::size_t r = 0; r < reps.size(); ++r) m.push_back(per_replica_mean(reps[r]));
        double mean = 0.0;
        for (double x : m) mean += x;
        mean /= static_cast<double>(m.size());
        double var = 0.0;
        for (double x : m) var += (x - mean) * (x - mean);
        var /= static_cast<double>(m.size() - 1);
        double half = 1.96 * std::sqrt(var / static_cast<double>(m.size()));
        return std::pair<double, double>(mean, half);
    };

    for (std::size_t v = 0; v < nv; ++v) {
        PayoffEstimate::PerNode pn;
        pn.node = net.nodes()[v].id;
        const NodeClass cls = net.nodes()[v].cls;
        if (cls == NodeClass::Producer) {
            auto [m, h] = ci_of([&](const ReplicaOut& r) {
                return r.life_n[v] ? r.life_sum[v] / static_cast<double>(r.life_n[v]) : 0.0;
            });
            pn.u1 = m;
            pn.u1_ci = h;
            pn.u1_estimated = true;
            for (const auto& r : reps) pn.n1 += r.life_n[v];
        } else if (cls == NodeClass::Consumer) {
            auto [m, h] = ci_of([&](const ReplicaOut& r) {
                return r.life_n[v] ? r.life_sum[v] / static_cast<double>(r.life_n[v]) : 0.0;
            });
            pn.u0 = m;
            pn.u0_ci = h;
            pn.u0_estimated = true;
            pn.u1 = net.nodes()[v].value.value_or(0.0);
            for (const auto& r : reps) pn.n0 += r.life_n[v];
        } else {
            auto [m0, h0] = ci_of([&](const ReplicaOut& r) {
                return r.v0_n[v] ? r.v0_sum[v] / static_cast<double>(r.v0_n[v]) : 0.0;
            });
            auto [m1, h1] = ci_of([&](const ReplicaOut& r) {
                return r.v1_n[v] ? r.v1_sum[v] / static_cast<double>(r.v1_n[v]) : 0.0;
            });
            pn.u0 = m0;
            pn.u0_ci = h0;
            pn.u1 = m1;
            pn.u1_ci = h1;
            pn.u0_estimated = pn.u1_estimated = true;
            for (const auto& r : reps) {
                pn.n0 += r.v0_n[v];
                pn.n1 += r.v1_n[v];
            }
        }
        est.nodes.push_back(std::move(pn));
    }
    return est;
}

}  // namespace midmarket

#pragma once

// Finding and verifying limit stationary equilibria: the three-step
// verification (steady state, support solve, sign checks), pure-pattern
// enumeration, mixed-probability root finding, the damped fixed-point
// heuristic, the two-hop closed form and the cheapest-route audit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "midmarket/dynamics.hpp"
#include "midmarket/network.hpp"
#include "midmarket/parallel.hpp"
#include "midmarket/payoffs.hpp"
#include "midmarket/rng.hpp"

namespace midmarket {

enum class Method : std::uint8_t { Direct, Enumeration, MixedRoot, FixedPoint, ClosedForm };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Direct: return "direct";
        case Method::Enumeration: return "enumeration";
        case Method::MixedRoot: return "mixed-root";
        case Method::FixedPoint: return "fixed-point";
        case Method::ClosedForm: return "closed-form";
    }
    return "?";
}

struct SolveOptions {
    bool patient = false;     // solve payoffs in the exact delta -> 1 limit
    double sign_tol = kSignTol;
};

struct EquilibriumReport {
    TradePattern pattern;
    MarketState state;
    PayoffProfile profile;
    bool verified = false;
    bool boundary = false;  // some weak inequality is tight; the complementary
                            // disposition verifies as well
    SignReport violations;
    Method method = Method::Direct;
    std::string diagnostic;
    double sign_tol = kSignTol;
    long iterations = 0;
};

namespace detail {
inline PayoffProfile solve_for(const TradingNetwork& net, const MarketState& st,
                               const std::vector<Support>& sup, const SolveOptions& opts) {
    return opts.patient ? solve_patient(net, st, sup) : solve_limit(net, st, sup);
}
}  // namespace detail

// Three-step verification of a candidate pattern: compute the steady state,
// solve the payoff system on the pattern's support, check every gap sign
// (including the trade-gain condition on avoided edges).
inline EquilibriumReport verify(const TradingNetwork& net, const TradePattern& pattern,
                                const SolveOptions& opts = {}) {
    require_valid(net);
    EquilibriumReport rep;
    rep.pattern = pattern;
    rep.sign_tol = opts.sign_tol;
    rep.state = steady_state(net, pattern);
    auto sup = support_from(pattern);
    try {
        rep.profile = detail::solve_for(net, rep.state, sup, opts);
    } catch (const SingularSupportError& err) {
        rep.verified = false;
        rep.diagnostic = err.what();
        return rep;
    }
    rep.violations = check_signs(rep.profile, sup, opts.sign_tol);
    rep.verified = rep.violations.ok();
    for (std::size_t e = 0; e < sup.size(); ++e) {
        double g = sup[e] == Support::Active ? rep.profile.z_scaled[e] : rep.profile.z[e];
        if (sup[e] != Support::Pinned && std::abs(g) <= opts.sign_tol) rep.boundary = true;
    }
    return rep;
}

class EnumerationBudgetError : public std::runtime_error {
public:
    explicit EnumerationBudgetError(std::size_t n_edges)
        : std::runtime_error("pure-pattern enumeration refused: 2^" + std::to_string(n_edges) +
                             " patterns exceeds the |E| <= 24 budget") {}
};

// Verifies every pattern in {Always,Never}^E. Order is deterministic:
// ascending bit patterns over the canonical edge order (bit set = Always).
inline std::vector<EquilibriumReport> enumerate_pure(const TradingNetwork& net,
                                                     const SolveOptions& opts = {},
                                                     unsigned threads = 0) {
    require_valid(net);
    const std::size_t ne = net.edges().size();
    if (ne > 24) throw EnumerationBudgetError(ne);
    const std::uint64_t total = std::uint64_t{1} << ne;
    const std::size_t nchunks = std::min<std::uint64_t>(total, 64);
    std::vector<std::vector<EquilibriumReport>> found(nchunks);
    parallel_for(
        nchunks,
        [&](std::size_t c) {
            std::uint64_t lo = total * c / nchunks, hi = total * (c + 1) / nchunks;
            for (std::uint64_t mask = lo; mask < hi; ++mask) {
                TradePattern pat = TradePattern::never(ne);
                for (std::size_t e = 0; e < ne; ++e)
                    if (mask >> e & 1) pat.set_always(e);
                EquilibriumReport rep = verify(net, pat, opts);
                if (rep.verified) {
                    rep.method = Method::Enumeration;
                    found[c].push_back(std::move(rep));
                }
            }
        },
        threads);
    std::vector<EquilibriumReport> out;
    for (auto& chunk : found)
        for (auto& rep : chunk) out.push_back(std::move(rep));
    return out;
}

// Root finding for trade probabilities on designated Mixed edges: the
// equilibrium requires the post-hoc gain on each such edge to vanish once the
// steady state has adjusted to lambda.
inline EquilibriumReport solve_mixed(const TradingNetwork& net, const TradePattern& base,
                                     const std::vector<int>& mixed_edges,
                                     const SolveOptions& opts = {}) {
    require_valid(net);
    detail::check_pattern(net, base);
    if (mixed_edges.empty() || mixed_edges.size() > 2)
        throw std::invalid_argument("solve_mixed expects 1 or 2 designated mixed edges");
    for (int e : mixed_edges)
        if (e < 0 || static_cast<std::size_t>(e) >= net.edges().size())
            throw std::invalid_argument("mixed edge index out of range");

    auto sup = support_from(base);
    for (int e : mixed_edges) sup[static_cast<std::size_t>(e)] = Support::Pinned;

    const double eps = 1e-12;
    TradePattern pat = base;
    auto gain = [&](const std::vector<double>& lams, int which) {
        for (std::size_t i = 0; i < mixed_edges.size(); ++i) {
            auto e = static_cast<std::size_t>(mixed_edges[i]);
            pat.disp[e] = Disposition::Mixed;
            pat.lambda[e] = lams[i];
        }
        MarketState st = steady_state(net, pat);
        PayoffProfile prof = detail::solve_for(net, st, sup, opts);
        return prof.z[static_cast<std::size_t>(mixed_edges[static_cast<std::size_t>(which)])];
    };

    // 0: root found, 1: no sign change, 2: gain does not depend on lambda
    auto bisect_one = [&](std::vector<double>& lams, int which, long* iters) -> int {
        double lo = eps, hi = 1.0 - eps;
        std::vector<double> probe = lams;
        probe[static_cast<std::size_t>(which)] = lo;
        double glo = gain(probe, which);
        probe[static_cast<std::size_t>(which)] = hi;
        double ghi = gain(probe, which);
        if (std::abs(glo) <= kSignTol && std::abs(ghi) <= kSignTol) return 2;
        if (glo * ghi > 0.0) return 1;
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (lo + hi);
            probe[static_cast<std::size_t>(which)] = mid;
            double gmid = gain(probe, which);
            ++*iters;
            if (std::abs(gmid) <= kSignTol) break;
            if (gmid * glo <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                glo = gmid;
            }
        }
        lams[static_cast<std::size_t>(which)] = mid;
        // a root at the boundary is a pure disposition, not an interior mix
        if (mid < 1e-9 || mid > 1.0 - 1e-9) return 1;
        return 0;
    };

    EquilibriumReport fail;
    fail.pattern = base;
    fail.method = Method::MixedRoot;
    fail.sign_tol = opts.sign_tol;
    fail.verified = false;

    long iters = 0;
    std::vector<double> lams(mixed_edges.size(), 0.5);
    auto describe = [](int rc) {
        return rc == 2 ? "indeterminate mixed probability: gain vanishes identically on (0,1)"
                       : "no interior mixed equilibrium: gain does not change sign on (0,1)";
    };
    try {
        if (mixed_edges.size() == 1) {
            int rc = bisect_one(lams, 0, &iters);
            if (rc != 0) {
                fail.diagnostic = describe(rc);
                return fail;
            }
        } else {
            // damped alternating bisection
            bool settled = false;
            for (int sweep = 0; sweep < 100 && !settled; ++sweep) {
                settled = true;
                for (int which = 0; which < 2; ++which) {
                    std::vector<double> prev = lams;
                    int rc = bisect_one(lams, which, &iters);
                    if (rc != 0) {
                        fail.diagnostic = describe(rc);
                        return fail;
                    }
                    lams[static_cast<std::size_t>(which)] =
                        0.5 * prev[static_cast<std::size_t>(which)] + 0.5 * lams[static_cast<std::size_t>(which)];
                }
                for (int which = 0; which < 2; ++which)
                    if (std::abs(gain(lams, which)) > kSignTol) settled = false;
            }
            if (!settled) {
                fail.diagnostic = "alternating bisection did not settle";
                return fail;
            }
        }
    } catch (const SingularSupportError& err) {
        fail.diagnostic = err.what();
        return fail;
    }

    TradePattern result = base;
    for (std::size_t i = 0; i < mixed_edges.size(); ++i)
        result.set_mixed(static_cast<std::size_t>(mixed_edges[i]), lams[i]);
    EquilibriumReport rep = verify(net, result, opts);
    rep.method = Method::MixedRoot;
    rep.iterations = iters;
    return rep;
}

// Pure enumeration plus the convenience sweep of single-Mixed-edge
// designations, taken over every pure disposition of the remaining edges.
// Equal patterns (same dispositions, lambda within 1e-6) are reported once,
// in deterministic order.
inline std::vector<EquilibriumReport> discover_equilibria(const TradingNetwork& net,
                                                          const SolveOptions& opts = {}) {
    std::vector<EquilibriumReport> found = enumerate_pure(net, opts);
    const std::size_t ne = net.edges().size();
    auto add_unique = [&](EquilibriumReport&& rep) {
        if (!rep.verified) return;
        for (const auto& other : found) {
            if (other.pattern.disp != rep.pattern.disp) continue;
            double d = 0.0;
            for (std::size_t e = 0; e < ne; ++e)
                d = std::max(d, std::abs(other.pattern.lambda[e] - rep.pattern.lambda[e]));
            if (d < 1e-6) return;
        }
        found.push_back(std::move(rep));
    };
    if (ne >= 1 && ne <= 12) {
        for (std::size_t me = 0; me < ne; ++me) {
            const std::uint64_t total = std::uint64_t{1} << (ne - 1);
            for (std::uint64_t mask = 0; mask < total; ++mask) {
                TradePattern base = TradePattern::never(ne);
                std::size_t bit = 0;
                for (std::size_t e = 0; e < ne; ++e) {
                    if (e == me) continue;
                    if (mask >> bit & 1) base.set_always(e);
                    ++bit;
                }
                base.set_always(me);  // placeholder; solve_mixed pins it
                add_unique(solve_mixed(net, base, {static_cast<int>(me)}, opts));
            }
        }
    }
    return found;
}

// ---------------------------------------------------------------------------
// Two-hop closed form (producer 1 -> middleman 2 -> consumer 3).

struct TwoHopSolution {
    enum class Regime : std::uint8_t { AlwaysTrade, Delay };
    Regime regime = Regime::AlwaysTrade;
    double lambda12 = 1.0;
    double lambda23 = 1.0;
    double mu2 = 0.0;
    double u1_2 = 0.0;  // middleman holding
    double u0_2 = 0.0;  // middleman empty-handed
    double u0_3 = 0.0;  // consumer surplus
    double u1_1 = 0.0;  // producer surplus
    double v_bar = 0.0; // regime threshold
};

inline TwoHopSolution two_hop_closed_form(double a, double b, double V, double pi12,
                                          double pi23) {
    if (!(pi12 > 0.0 && pi23 > 0.0)) throw std::domain_error("link probabilities must be positive");
    if (!(V > a + b)) throw std::domain_error("trade must be favorable: V > a + b");
    TwoHopSolution s;
    const double rho = pi12 / (pi12 + pi23);
    s.v_bar = (1.0 + rho) * a + b;
    s.lambda23 = 1.0;
    if (V >= s.v_bar) {
        s.regime = TwoHopSolution::Regime::AlwaysTrade;
        s.lambda12 = 1.0;
        s.mu2 = rho;
        const double d = 1.0 + s.mu2 - s.mu2 * s.mu2;
        s.u1_2 = ((2.0 - s.mu2) * (V - b) - a) / d;
        s.u0_2 = (V - (1.0 + s.mu2) * a - b) / d;
        s.u0_3 = s.mu2 * s.u1_2;
        s.u1_1 = (1.0 - s.mu2) * s.u0_2;
    } else {
        s.regime = TwoHopSolution::Regime::Delay;
        s.lambda12 = pi23 * (V - b - a) / (pi12 * (2.0 * a + b - V));
        s.mu2 = (V - b - a) / a;
        s.u1_2 = a;
        s.u0_2 = 0.0;
        s.u0_3 = V - b - a;
        s.u1_1 = 0.0;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Damped fixed-point heuristic on (lambda, mu, u), realizing the equilibrium
// correspondence with a smoothed trade rule lambda = sigmoid(z / T) and an
// annealed temperature. Pure supports converge outright; mixed edges show up
// as persistent near-zero gaps and are finished off by solve_mixed.

struct FixedPointOptions {
    double damping = 0.1;
    double temp0 = 0.1;
    double anneal = 0.5;
    int anneal_every = 100;
    long max_iters = 100000;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    bool patient = false;     // verify the converted pattern in patient mode
    double sign_tol = kSignTol;
    // explicit starting point; empty vectors are filled from the seed
    std::vector<double> init_lambda;
    std::vector<double> init_u0, init_u1;
};

struct FixedPointResult {
    EquilibriumReport report;
    bool converged = false;        // the damped iteration itself reached tol
    long iterations = 0;
    std::vector<double> residual_history;  // subsampled every 100 iterations
};

inline FixedPointResult fixed_point_iterate(const TradingNetwork& net,
                                            const FixedPointOptions& opts = {}) {
    require_valid(net);
    if (!(opts.damping > 0.0 && opts.damping <= 1.0))
        throw std::invalid_argument("damping must lie in (0,1]");
    const std::size_t ne = net.edges().size();
    const std::size_t nv = net.nodes().size();
    const double vmax = net.max_consumer_value();
    // producers and consumers are bounded by vmax; long-lived middlemen may
    // capitalize future fees above it, so the stability rail sits higher
    const double rail = 4.0 * vmax;

    // Iterate at a moderate coefficient scale in patient mode; the converted
    // pattern is re-verified exactly afterwards.
    double t;
    if (opts.patient) {
        double kmax = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            kmax = std::max(kmax, net.edges()[e].pi / (2.0 * net.nodes()[net.edge_from(e)].population));
            kmax = std::max(kmax, net.edges()[e].pi / (2.0 * net.nodes()[net.edge_to(e)].population));
        }
        t = kmax / 5.0;
    } else {
        t = time_parameter(net);
    }

    SplitMix64 rng(opts.seed);
    std::vector<double> lam(ne), u0(nv, 0.0), u1(nv, 0.0);
    if (!opts.init_lambda.empty()) {
        if (opts.init_lambda.size() != ne)
            throw std::invalid_argument("initial lambda does not match network edge count");
        lam = opts.init_lambda;
    } else {
        for (auto& l : lam) l = rng.uniform01();
    }
    const bool have_u = !opts.init_u0.empty() || !opts.init_u1.empty();
    if (have_u && (opts.init_u0.size() != nv || opts.init_u1.size() != nv))
        throw std::invalid_argument("initial payoffs do not match network node count");
    for (std::size_t v = 0; v < nv; ++v) {
        const Node& nd = net.nodes()[v];
        if (have_u) {
            u0[v] = opts.init_u0[v];
            u1[v] = opts.init_u1[v];
        } else if (nd.cls == NodeClass::Consumer) {
            u0[v] = rng.uniform01() * vmax;
        } else {
            u1[v] = rng.uniform01() * vmax;
            u0[v] = nd.cls == NodeClass::Middleman ? rng.uniform01() * vmax : 0.0;
        }
        // the producer/consumer boundary conditions always hold
        if (nd.cls == NodeClass::Producer) u0[v] = 0.0;
        if (nd.cls == NodeClass::Consumer) u1[v] = nd.value.value_or(0.0);
    }
    MarketState mu = steady_state(net, lam);

    const long window = 400;
    std::vector<double> zbar(ne, 0.0), lambar(ne, 0.0);
    std::vector<double> zmin(ne, 1e300), zmax(ne, -1e300);
    long window_count = 0;

    FixedPointResult res;
    double T = opts.temp0;
    const double d = opts.damping;
    std::vector<double> z(ne), Lam(ne), nu0(nv), nu1(nv);
    long it = 0;
    for (; it < opts.max_iters; ++it) {
        if (it > 0 && opts.anneal_every > 0 && it % opts.anneal_every == 0)
            T = std::max(T * opts.anneal, 1e-6);
        for (std::size_t e = 0; e < ne; ++e) {
            int i = net.edge_from(e), j = net.edge_to(e);
            z[e] = (u1[j] - u0[j]) - (u1[i] - u0[i]) - net.edges()[e].cost;
            double x = std::clamp(z[e] / T, -500.0, 500.0);
            Lam[e] = 1.0 / (1.0 + std::exp(-x));
        }
        MarketState mu_t = steady_state(net, Lam);
        for (std::size_t v = 0; v < nv; ++v) {
            const Node& nd = net.nodes()[v];
            double s0 = 0.0, s1 = 0.0;
            switch (nd.cls) {
                case NodeClass::Producer:
                    for (int e : net.out_edges(static_cast<int>(v))) {
                        double w = net.nodes()[net.edge_to(e)].cls == NodeClass::Middleman
                                       ? 1.0 - mu.of_node(net, net.edge_to(e))
                                       : 1.0;
                        s1 += kappa_at(net, static_cast<std::size_t>(e), static_cast<int>(v), t) * w *
                              std::max(z[static_cast<std::size_t>(e)], 0.0);
                    }
                    break;
                case NodeClass::Middleman:
                    for (int e : net.in_edges(static_cast<int>(v)))
                        s0 += kappa_at(net, static_cast<std::size_t>(e), static_cast<int>(v), t) *
                              std::max(z[static_cast<std::size_t>(e)], 0.0);
                    for (int e : net.out_edges(static_cast<int>(v)))
                        s1 += kappa_at(net, static_cast<std::size_t>(e), static_cast<int>(v), t) *
                              std::max(z[static_cast<std::size_t>(e)], 0.0);
                    break;
                case NodeClass::Consumer:
                    for (int e : net.in_edges(static_cast<int>(v))) {
                        double w = net.nodes()[net.edge_from(e)].cls == NodeClass::Middleman
                                       ? mu.of_node(net, net.edge_from(e))
                                       : 1.0;
                        s0 += kappa_at(net, static_cast<std::size_t>(e), static_cast<int>(v), t) * w *
                              std::max(z[static_cast<std::size_t>(e)], 0.0);
                    }
                    s1 = nd.value.value_or(0.0);
                    break;
            }
            nu0[v] = std::clamp(s0, 0.0, rail);
            nu1[v] = nd.cls == NodeClass::Consumer ? s1 : std::clamp(s1, 0.0, rail);
        }
        double step = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            double nl = (1.0 - d) * lam[e] + d * Lam[e];
            step = std::max(step, std::abs(nl - lam[e]));
            lam[e] = nl;
        }
        for (std::size_t s = 0; s < mu.mu.size(); ++s) {
            double nm = (1.0 - d) * mu.mu[s] + d * mu_t.mu[s];
            step = std::max(step, std::abs(nm - mu.mu[s]));
            mu.mu[s] = nm;
            mu.degenerate[s] = mu_t.degenerate[s];
        }
        for (std::size_t v = 0; v < nv; ++v) {
            double n0 = (1.0 - d) * u0[v] + d * nu0[v];
            double n1 = (1.0 - d) * u1[v] + d * nu1[v];
            step = std::max(step, std::abs(n0 - u0[v]));
            step = std::max(step, std::abs(n1 - u1[v]));
            u0[v] = n0;
            u1[v] = n1;
        }
        double residual = step / d;
        if (it % 100 == 0) res.residual_history.push_back(residual);
        if (it + window >= opts.max_iters) {
            for (std::size_t e = 0; e < ne; ++e) {
                zbar[e] += z[e];
                lambar[e] += lam[e];
                zmin[e] = std::min(zmin[e], z[e]);
                zmax[e] = std::max(zmax[e], z[e]);
            }
            ++window_count;
        }
        if (residual < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.iterations = it;

    SolveOptions vopts;
    vopts.patient = opts.patient;
    vopts.sign_tol = opts.sign_tol;
    TradePattern pat = TradePattern::never(ne);
    std::vector<int> mixed;
    if (res.converged) {
        for (std::size_t e = 0; e < ne; ++e) {
            if (lam[e] > 1.0 - 1e-6) pat.set_always(e);
            else if (lam[e] < 1e-6) pat.set_never(e);
            else { pat.set_mixed(e, lam[e]); mixed.push_back(static_cast<int>(e)); }
        }
    } else {
        // Plateau: an edge whose gap keeps crossing zero (or hovers at zero on
        // average) is indifferent, i.e. mixed; otherwise the gap sign decides.
        const double ztol = 1e-4;
        for (std::size_t e = 0; e < ne; ++e) {
            double zm = window_count ? zbar[e] / static_cast<double>(window_count) : z[e];
            double lm = window_count ? lambar[e] / static_cast<double>(window_count) : lam[e];
            bool oscillates = window_count && zmin[e] < -1e-9 && zmax[e] > 1e-9;
            if (!oscillates && zm > ztol) pat.set_always(e);
            else if (!oscillates && zm < -ztol) pat.set_never(e);
            else { pat.set_mixed(e, std::clamp(lm, 1e-6, 1.0 - 1e-6)); mixed.push_back(static_cast<int>(e)); }
        }
    }

    if (mixed.empty()) {
        res.report = verify(net, pat, vopts);
    } else if (mixed.size() <= 2) {
        TradePattern base = pat;
        for (int e : mixed) base.set_always(static_cast<std::size_t>(e));
        res.report = solve_mixed(net, base, mixed, vopts);
    } else {
        res.report.pattern = pat;
        res.report.verified = false;
        res.report.diagnostic = "fixed-point iteration left " + std::to_string(mixed.size()) +
                                " candidate mixed edges; not resolvable";
    }
    res.report.method = Method::FixedPoint;
    res.report.iterations = res.iterations;
    if (!res.converged && res.report.diagnostic.empty())
        res.report.diagnostic = "damped iteration plateaued; pattern recovered from averaged gaps";
    return res;
}

// ---------------------------------------------------------------------------
// Cheapest-route audit for patient-regime equilibria.

struct RouteFlag {
    int producer;
    int consumer;
    std::string route;   // "p->c" or "p->m->c"
    double cost;
    double min_cost;
};

struct SurplusBound {
    int producer;
    int consumer;
    double total_surplus;  // u1(p) + u0(c)
    double bound;          // V_c - min route cost - eps
    bool ok;
};

struct RouteReport {
    std::vector<RouteFlag> flags;          // traded routes that are not minimum cost
    std::vector<SurplusBound> bounds;      // per connected producer-consumer pair
    bool ok() const {
        if (!flags.empty()) return false;
        for (const auto& b : bounds)
            if (!b.ok) return false;
        return true;
    }
};

inline RouteReport cheapest_route_check(const TradingNetwork& net, const EquilibriumReport& rep,
                                        double eps) {
    RouteReport out;
    struct Route {
        double cost;
        bool traded;
        std::string desc;
    };
    for (std::size_t p = 0; p < net.nodes().size(); ++p) {
        if (net.nodes()[p].cls != NodeClass::Producer) continue;
        for (std::size_t c = 0; c < net.nodes().size(); ++c) {
            if (net.nodes()[c].cls != NodeClass::Consumer) continue;
            std::vector<Route> routes;
            for (int e : net.out_edges(static_cast<int>(p))) {
                if (net.edge_to(e) == static_cast<int>(c)) {
                    routes.push_back({net.edges()[e].cost, rep.pattern.lambda[static_cast<std::size_t>(e)] > 0.0,
                                      net.nodes()[p].id + "->" + net.nodes()[c].id});
                } else if (net.nodes()[net.edge_to(e)].cls == NodeClass::Middleman) {
                    int m = net.edge_to(e);
                    for (int e2 : net.out_edges(m))
                        if (net.edge_to(e2) == static_cast<int>(c))
                            routes.push_back(
                                {net.edges()[e].cost + net.edges()[e2].cost,
                                 rep.pattern.lambda[static_cast<std::size_t>(e)] > 0.0 &&
                                     rep.pattern.lambda[static_cast<std::size_t>(e2)] > 0.0,
                                 net.nodes()[p].id + "->" + net.nodes()[m].id + "->" + net.nodes()[c].id});
                }
            }
            if (routes.empty()) continue;
            double mincost = routes[0].cost;
            for (const auto& r : routes) mincost = std::min(mincost, r.cost);
            for (const auto& r : routes)
                if (r.traded && r.cost > mincost + 1e-12)
                    out.flags.push_back({static_cast<int>(p), static_cast<int>(c), r.desc, r.cost, mincost});
            double total = rep.profile.u1[p] + rep.profile.u0[c];
            double bound = net.nodes()[c].value.value_or(0.0) - mincost - eps;
            out.bounds.push_back({static_cast<int>(p), static_cast<int>(c), total, bound, total >= bound});
        }
    }
    return out;
}

}  // namespace midmarket

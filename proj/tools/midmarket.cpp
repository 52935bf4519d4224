// Command-line front end: load networks, run the equilibrium solvers and the
// Monte Carlo simulator, emit human-readable and machine-readable reports.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "midmarket/builtins.hpp"
#include "midmarket/dynamics.hpp"
#include "midmarket/equilibrium.hpp"
#include "midmarket/io.hpp"
#include "midmarket/parallel.hpp"
#include "midmarket/payoffs.hpp"
#include "midmarket/simulate.hpp"

namespace {

using namespace midmarket;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;
constexpr int kExitNoConvergence = 3;

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

TradingNetwork load_source(const std::string& src) {
    if (src.rfind("builtin:", 0) == 0) {
        try {
            return builtin(src.substr(8));
        } catch (const std::exception& e) {
            throw CliError(kExitDomain, e.what());
        }
    }
    try {
        return load_network(src);
    } catch (const IoError& e) {
        throw CliError(kExitIo, e.what());
    } catch (const FormatError& e) {
        throw CliError(kExitDomain, e.what());
    }
}

TradingNetwork apply_patience(const TradingNetwork& net, std::optional<double> f,
                              std::optional<double> delta) {
    if (f && delta) throw CliError(kExitDomain, "give at most one of --f and --delta");
    if (f) return net.rescaled_f(*f);
    if (delta) return net.rescaled_discount(*delta);
    return net;
}

int edge_of(const TradingNetwork& net, const std::string& span) {
    auto dash = span.find('-');
    if (dash == std::string::npos)
        throw CliError(kExitDomain, "edge must be written FROM-TO: " + span);
    int e = net.edge_index(span.substr(0, dash), span.substr(dash + 1));
    if (e < 0) throw CliError(kExitDomain, "no such edge: " + span);
    return e;
}

// Pattern strings: "always" or "never" as the base disposition, then
// comma-separated overrides "never:1-4", "always:1-2", "mixed:1-2=0.4" or
// "mixed:1-2=auto". Auto edges are returned for root finding.
struct ParsedPattern {
    TradePattern pattern;
    std::vector<int> auto_mixed;
};

ParsedPattern parse_pattern(const TradingNetwork& net, const std::string& str) {
    ParsedPattern out{TradePattern::always(net.edges().size()), {}};
    std::stringstream ss(str);
    std::string tok;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (first && tok == "always") {
            out.pattern = TradePattern::always(net.edges().size());
            first = false;
            continue;
        }
        if (first && tok == "never") {
            out.pattern = TradePattern::never(net.edges().size());
            first = false;
            continue;
        }
        first = false;
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw CliError(kExitDomain, "unparseable pattern clause: " + tok);
        std::string kind = tok.substr(0, colon);
        std::string rest = tok.substr(colon + 1);
        if (kind == "never") {
            out.pattern.set_never(static_cast<std::size_t>(edge_of(net, rest)));
        } else if (kind == "always") {
            out.pattern.set_always(static_cast<std::size_t>(edge_of(net, rest)));
        } else if (kind == "mixed") {
            auto eq = rest.find('=');
            if (eq == std::string::npos)
                throw CliError(kExitDomain, "mixed clause needs =LAMBDA or =auto: " + tok);
            int e = edge_of(net, rest.substr(0, eq));
            std::string val = rest.substr(eq + 1);
            if (val == "auto") {
                out.pattern.set_always(static_cast<std::size_t>(e));
                out.auto_mixed.push_back(e);
            } else {
                out.pattern.set_mixed(static_cast<std::size_t>(e), std::stod(val));
            }
        } else {
            throw CliError(kExitDomain, "unparseable pattern clause: " + tok);
        }
    }
    return out;
}

void print_report_text(const TradingNetwork& net, const EquilibriumReport& rep, std::ostream& os) {
    os << (rep.verified ? "verified equilibrium" : "not an equilibrium") << " (method "
       << to_string(rep.method) << (rep.boundary ? ", boundary ties" : "") << ")\n";
    if (!rep.diagnostic.empty()) os << "  diagnostic: " << rep.diagnostic << '\n';
    os << "  pattern:";
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        os << ' ' << net.edges()[e].from << "->" << net.edges()[e].to << '='
           << to_string(rep.pattern.disp[e]);
        if (rep.pattern.disp[e] == Disposition::Mixed) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "(%.6g)", rep.pattern.lambda[e]);
            os << buf;
        }
    }
    os << '\n';
    if (rep.state.mu.size() == net.middlemen().size())
        for (std::size_t s = 0; s < net.middlemen().size(); ++s)
            os << "  mu(" << net.nodes()[net.middlemen()[s]].id << ") = " << rep.state.mu[s]
               << (rep.state.degenerate[s] ? " (degenerate)" : "") << '\n';
    if (!rep.profile.u0.empty()) {
        for (std::size_t v = 0; v < net.nodes().size(); ++v)
            os << "  u0(" << net.nodes()[v].id << ") = " << rep.profile.u0[v] << "  u1("
               << net.nodes()[v].id << ") = " << rep.profile.u1[v] << '\n';
        for (std::size_t e = 0; e < net.edges().size(); ++e)
            os << "  z(" << net.edges()[e].from << "->" << net.edges()[e].to
               << ") = " << rep.profile.z[e] << '\n';
    }
    for (const auto& v : rep.violations.violations) os << "  violation: " << v.describe(net) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& src) {
    TradingNetwork net = load_source(src);
    ValidationReport rep = validate(net);
    if (!rep.ok()) {
        std::cerr << rep.to_string();
        return kExitDomain;
    }
    std::cout << "ok: " << net.nodes().size() << " nodes, " << net.edges().size() << " edges\n";
    return kExitOk;
}

struct SolveArgs {
    std::string src;
    std::optional<double> f, delta;
    std::string pattern = "always";
    bool enumerate = false;
    bool fixed_point = false;
    bool patient = false;
    bool json = false;
    std::uint64_t seed = 0;
    std::string mixed_edges;  // comma-separated FROM-TO list
};

int cmd_solve(const SolveArgs& a) {
    TradingNetwork net = apply_patience(load_source(a.src), a.f, a.delta);
    ValidationReport vr = validate(net);
    if (!vr.ok()) {
        std::cerr << vr.to_string();
        return kExitDomain;
    }
    SolveOptions opts;
    opts.patient = a.patient;

    std::vector<EquilibriumReport> reports;
    bool nonconverged = false;
    if (a.enumerate) {
        for (auto& rep : enumerate_pure(net, opts)) reports.push_back(std::move(rep));
    } else {
        ParsedPattern pp = parse_pattern(net, a.pattern);
        std::vector<int> mixed = pp.auto_mixed;
        if (!a.mixed_edges.empty()) {
            std::stringstream ss(a.mixed_edges);
            std::string tok;
            while (std::getline(ss, tok, ',')) mixed.push_back(edge_of(net, tok));
        }
        if (a.fixed_point) {
            FixedPointOptions fo;
            fo.seed = a.seed;
            fo.patient = a.patient;
            FixedPointResult fr = fixed_point_iterate(net, fo);
            nonconverged = !fr.report.verified;
            reports.push_back(std::move(fr.report));
        } else if (!mixed.empty()) {
            EquilibriumReport rep = solve_mixed(net, pp.pattern, mixed, opts);
            nonconverged = !rep.verified && !rep.diagnostic.empty();
            reports.push_back(std::move(rep));
        } else {
            reports.push_back(verify(net, pp.pattern, opts));
        }
    }

    if (a.json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& rep : reports) j.push_back(report_to_json(net, rep));
        std::cout << j.dump(2) << '\n';
    } else {
        if (a.enumerate)
            std::cout << reports.size() << " verified pure pattern(s)\n";
        for (const auto& rep : reports) print_report_text(net, rep, std::cout);
    }
    return nonconverged ? kExitNoConvergence : kExitOk;
}

struct SweepArgs {
    std::string src;
    std::string param;          // f | delta | x | edge-cost:F-T | consumer-value:ID
    std::string grid;           // comma-separated ascending values
    std::string task = "auto";  // verify | enumerate | two-hop | mixed:F-T[,F-T] | auto
    std::string pattern = "always";
    bool patient = false;
    std::optional<double> f, delta;
    std::string out;
};

TradingNetwork with_param(const TradingNetwork& net, const std::string& param, double v) {
    if (param == "f") return net.rescaled_f(v);
    if (param == "delta") return net.rescaled_discount(v);
    std::vector<Node> nodes = net.nodes();
    std::vector<Edge> edges = net.edges();
    if (param == "x") {
        // the surplus-triangle composite: C(1->3) = 4 - x
        int e = net.edge_index("1", "3");
        if (e < 0) throw CliError(kExitDomain, "param x needs an edge 1->3");
        edges[static_cast<std::size_t>(e)].cost = 4.0 - v;
    } else if (param.rfind("edge-cost:", 0) == 0) {
        int e = edge_of(net, param.substr(10));
        edges[static_cast<std::size_t>(e)].cost = v;
    } else if (param.rfind("consumer-value:", 0) == 0) {
        int n = net.node_index(param.substr(15));
        if (n < 0) throw CliError(kExitDomain, "no such node in " + param);
        nodes[static_cast<std::size_t>(n)].value = v;
    } else {
        throw CliError(kExitDomain, "unknown sweep parameter: " + param);
    }
    return TradingNetwork(std::move(nodes), std::move(edges), net.discount(), net.patience_f());
}

// Reports at one grid point, deduplicated by pattern.
std::vector<EquilibriumReport> sweep_point(const TradingNetwork& net, const SweepArgs& a) {
    SolveOptions opts;
    opts.patient = a.patient;
    std::vector<EquilibriumReport> found;
    auto add_unique = [&](EquilibriumReport&& rep) {
        if (!rep.verified) return;
        for (const auto& other : found) {
            if (other.pattern.disp != rep.pattern.disp) continue;
            double d = 0.0;
            for (std::size_t e = 0; e < rep.pattern.lambda.size(); ++e)
                d = std::max(d, std::abs(other.pattern.lambda[e] - rep.pattern.lambda[e]));
            if (d < 1e-6) return;
        }
        found.push_back(std::move(rep));
    };

    if (a.task == "verify") {
        add_unique(verify(net, parse_pattern(net, a.pattern).pattern, opts));
    } else if (a.task == "enumerate") {
        for (auto& rep : enumerate_pure(net, opts)) add_unique(std::move(rep));
    } else if (a.task == "two-hop") {
        // closed form; requires the 1 -> 2 -> 3 chain
        int e12 = net.edge_index("1", "2"), e23 = net.edge_index("2", "3");
        int c = net.node_index("3");
        if (e12 < 0 || e23 < 0 || c < 0)
            throw CliError(kExitDomain, "task two-hop requires the 1->2->3 chain network");
        TwoHopSolution s = two_hop_closed_form(
            net.edges()[static_cast<std::size_t>(e12)].cost, net.edges()[static_cast<std::size_t>(e23)].cost,
            net.nodes()[static_cast<std::size_t>(c)].value.value_or(0.0),
            net.edges()[static_cast<std::size_t>(e12)].pi, net.edges()[static_cast<std::size_t>(e23)].pi);
        TradePattern pat = TradePattern::always(net.edges().size());
        if (s.regime == TwoHopSolution::Regime::Delay)
            pat.set_mixed(static_cast<std::size_t>(e12), s.lambda12);
        EquilibriumReport rep = verify(net, pat, SolveOptions{.patient = true});
        rep.method = Method::ClosedForm;
        add_unique(std::move(rep));
    } else if (a.task.rfind("mixed:", 0) == 0) {
        std::vector<int> mixed;
        std::stringstream ss(a.task.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ',')) mixed.push_back(edge_of(net, tok));
        add_unique(solve_mixed(net, parse_pattern(net, a.pattern).pattern, mixed, opts));
    } else if (a.task == "auto") {
        for (auto& rep : discover_equilibria(net, opts)) add_unique(std::move(rep));
    } else {
        throw CliError(kExitDomain, "unknown sweep task: " + a.task);
    }
    return found;
}

int cmd_sweep(const SweepArgs& a) {
    TradingNetwork base = apply_patience(load_source(a.src), a.f, a.delta);
    std::vector<double> grid;
    {
        std::stringstream ss(a.grid);
        std::string tok;
        while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
        if (grid.empty()) throw CliError(kExitDomain, "empty sweep grid");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (grid[i] <= grid[i - 1])
                throw CliError(kExitDomain, "sweep grid must be strictly ascending");
    }

    std::vector<std::vector<EquilibriumReport>> rows(grid.size());
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            TradingNetwork net = with_param(base, a.param, grid[i]);
            require_valid(net);
            rows[i] = sweep_point(net, a);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!errors[i].empty())
            throw CliError(kExitDomain, "grid point " + std::to_string(grid[i]) + ": " + errors[i]);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw CliError(kExitIo, "cannot write " + a.out);
        os = &file;
    }
    // fixed column order: parameter, equilibrium id, status, u0/u1 per node,
    // z and lambda per edge, mu per middleman
    *os << "param,equilibrium,status";
    for (const auto& n : base.nodes()) *os << ",u0:" << n.id << ",u1:" << n.id;
    for (const auto& e : base.edges()) *os << ",z:" << e.from << '-' << e.to << ",lambda:" << e.from << '-' << e.to;
    for (int m : base.middlemen()) *os << ",mu:" << base.nodes()[m].id;
    *os << '\n';
    os->precision(12);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (rows[i].empty()) {
            *os << grid[i] << ",0,none-found";
            for (std::size_t c = 0; c < 2 * base.nodes().size() + 2 * base.edges().size() +
                                            base.middlemen().size();
                 ++c)
                *os << ',';
            *os << '\n';
            continue;
        }
        for (std::size_t r = 0; r < rows[i].size(); ++r) {
            const auto& rep = rows[i][r];
            *os << grid[i] << ',' << r << ",verified";
            for (std::size_t v = 0; v < base.nodes().size(); ++v)
                *os << ',' << rep.profile.u0[v] << ',' << rep.profile.u1[v];
            for (std::size_t e = 0; e < base.edges().size(); ++e)
                *os << ',' << rep.profile.z[e] << ',' << rep.pattern.lambda[e];
            for (std::size_t s = 0; s < base.middlemen().size(); ++s) *os << ',' << rep.state.mu[s];
            *os << '\n';
        }
    }
    return kExitOk;
}

struct SimArgs {
    std::string src;
    std::string pattern = "always";
    std::int64_t k = 1;
    std::string k_list;
    std::int64_t periods = 1000000;
    std::int64_t burn_in = 100000;
    std::uint64_t seed = 0;
    int replicas = 4;
    std::string out;
    std::string trace;
    std::int64_t trace_every = 1000;
    bool payoffs = false;
    std::optional<double> delta;
};

int cmd_simulate(const SimArgs& a) {
    TradingNetwork net = apply_patience(load_source(a.src), std::nullopt, a.delta);
    ValidationReport vr = validate(net);
    if (!vr.ok()) {
        std::cerr << vr.to_string();
        return kExitDomain;
    }
    if (!net.discount()) {
        std::cerr << "simulate requires a discount factor: the replicated economy rescales "
                     "delta, not f (use --delta or a discount-mode network file)\n";
        return kExitDomain;
    }
    ParsedPattern pp = parse_pattern(net, a.pattern);
    if (!pp.auto_mixed.empty()) {
        std::cerr << "simulate needs explicit lambda on mixed edges (no =auto)\n";
        return kExitDomain;
    }
    SimConfig cfg;
    cfg.k = a.k;
    cfg.periods = a.periods;
    cfg.burn_in = a.burn_in;
    cfg.seed = a.seed;
    cfg.replicas = a.replicas;

    if (!a.trace.empty()) {
        SimConfig tcfg = cfg;
        tcfg.trace_every = a.trace_every;
        auto est = simulate_inventory(net, pp.pattern, tcfg);
        std::ofstream tf(a.trace);
        if (!tf) throw CliError(kExitIo, "cannot write " + a.trace);
        write_trace_csv(est, net, tf);
    }

    std::vector<std::int64_t> ks;
    if (!a.k_list.empty()) {
        std::stringstream ss(a.k_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) ks.push_back(std::stoll(tok));
    } else {
        ks.push_back(a.k);
    }

    std::vector<SweepRow> table = convergence_sweep(net, pp.pattern, ks, cfg);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw CliError(kExitIo, "cannot write " + a.out);
        os = &file;
    }
    os->precision(10);
    *os << "k,node,estimate,stderr,mu,deviation\n";
    for (const auto& row : table)
        *os << row.k << ',' << row.node << ',' << row.estimate << ',' << row.stderr_ << ','
            << row.mu << ',' << row.deviation << '\n';
    if (os != &std::cout) {
        std::cout << "wrote " << table.size() << " rows to " << a.out << '\n';
        for (const auto& row : table)
            std::cout << "k=" << row.k << " node " << row.node << ": estimate " << row.estimate
                      << " vs mu " << row.mu << " (|diff| " << std::abs(row.estimate - row.mu)
                      << ", rms dev " << row.deviation << ")\n";
    }
    if (a.payoffs) {
        cfg.replicas = std::max(cfg.replicas, 2);
        PayoffEstimate pe = estimate_payoffs(net, pp.pattern, cfg);
        std::cout << "empirical discounted payoffs (95% CI, analytic reference in brackets):\n";
        for (std::size_t v = 0; v < pe.nodes.size(); ++v) {
            const auto& pn = pe.nodes[v];
            std::cout << "  " << pn.node << ": ";
            if (pn.u0_estimated)
                std::cout << "u0 = " << pn.u0 << " +- " << pn.u0_ci << " [" << pe.analytic.u0[v]
                          << "]  ";
            if (pn.u1_estimated)
                std::cout << "u1 = " << pn.u1 << " +- " << pn.u1_ci << " [" << pe.analytic.u1[v]
                          << "]";
            std::cout << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"midmarket: bargaining-market equilibria on producer-middleman-consumer networks"};
    app.require_subcommand(1);

    std::string src;
    auto* validate_cmd = app.add_subcommand("validate", "check a network file against the schema and invariants");
    validate_cmd->add_option("network", src, "network file or builtin:<name>")->required();

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "verify, enumerate or root-find equilibria");
    solve_cmd->add_option("network", sa.src, "network file or builtin:<name>")->required();
    solve_cmd->add_option("--f", sa.f, "override the uniform patience parameter");
    solve_cmd->add_option("--delta", sa.delta, "override the discount factor");
    solve_cmd->add_option("--pattern", sa.pattern, "trade pattern, e.g. always,never:1-4,mixed:1-2=auto");
    solve_cmd->add_flag("--enumerate", sa.enumerate, "verify every pure pattern");
    solve_cmd->add_option("--mixed", sa.mixed_edges, "edges to treat as mixed (FROM-TO list)");
    solve_cmd->add_flag("--fixed-point", sa.fixed_point, "run the damped fixed-point heuristic");
    solve_cmd->add_flag("--patient", sa.patient, "solve in the exact delta->1 limit");
    solve_cmd->add_flag("--json", sa.json, "machine-readable output");
    solve_cmd->add_option("--seed", sa.seed, "seed for the fixed-point start");

    SweepArgs wa;
    auto* sweep_cmd = app.add_subcommand("sweep", "solve across a parameter grid, one CSV row per equilibrium");
    sweep_cmd->add_option("network", wa.src, "network file or builtin:<name>")->required();
    sweep_cmd->add_option("--param", wa.param, "f | delta | x | edge-cost:F-T | consumer-value:ID")->required();
    sweep_cmd->add_option("--grid", wa.grid, "ascending comma-separated values")->required();
    sweep_cmd->add_option("--task", wa.task, "verify | enumerate | two-hop | mixed:F-T | auto");
    sweep_cmd->add_option("--pattern", wa.pattern, "pattern for verify/mixed tasks");
    sweep_cmd->add_flag("--patient", wa.patient, "solve in the exact delta->1 limit");
    sweep_cmd->add_option("--f", wa.f, "override the uniform patience parameter");
    sweep_cmd->add_option("--delta", wa.delta, "override the discount factor");
    sweep_cmd->add_option("--out", wa.out, "CSV output path (default stdout)");

    SimArgs ma;
    auto* sim_cmd = app.add_subcommand("simulate", "finite-population Monte Carlo of the inventory chain");
    sim_cmd->add_option("network", ma.src, "network file or builtin:<name>")->required();
    sim_cmd->add_option("--pattern", ma.pattern, "trade pattern");
    sim_cmd->add_option("--k", ma.k, "replication factor");
    sim_cmd->add_option("--k-list", ma.k_list, "ascending list of replication factors");
    sim_cmd->add_option("--periods", ma.periods, "horizon in periods");
    sim_cmd->add_option("--burn-in", ma.burn_in, "periods discarded before averaging");
    sim_cmd->add_option("--seed", ma.seed, "master seed");
    sim_cmd->add_option("--replicas", ma.replicas, "independent replicas");
    sim_cmd->add_option("--delta", ma.delta, "override the discount factor");
    sim_cmd->add_option("--out", ma.out, "CSV output path");
    sim_cmd->add_option("--trace", ma.trace, "write a decimated occupancy trace CSV here");
    sim_cmd->add_option("--trace-every", ma.trace_every, "periods between trace rows");
    sim_cmd->add_flag("--estimate-payoffs", ma.payoffs, "also estimate discounted payoffs per node");

    std::string fsrc, fpattern = "always", fout;
    double fhorizon = 50.0, fstep = 0.01;
    std::string finit = "zero";
    auto* fluid_cmd = app.add_subcommand("fluid", "integrate the mean-field inventory flow");
    fluid_cmd->add_option("network", fsrc, "network file or builtin:<name>")->required();
    fluid_cmd->add_option("--pattern", fpattern, "trade pattern");
    fluid_cmd->add_option("--horizon", fhorizon, "fluid-time horizon");
    fluid_cmd->add_option("--step", fstep, "integration step");
    fluid_cmd->add_option("--init", finit, "zero | full | stationary");
    fluid_cmd->add_option("--out", fout, "CSV output path (default stdout)");

    std::string bname, bout;
    auto* builtin_cmd = app.add_subcommand("builtin", "export a builtin network as a network file");
    builtin_cmd->add_option("name", bname, "network2 | triangle-halfcost | two-hop(a,b,V,p12,p23) | surplus-triangle(x)")->required();
    builtin_cmd->add_option("--out", bout, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate_cmd) return cmd_validate(src);
        if (*solve_cmd) return cmd_solve(sa);
        if (*sweep_cmd) return cmd_sweep(wa);
        if (*sim_cmd) return cmd_simulate(ma);
        if (*fluid_cmd) {
            TradingNetwork net = load_source(fsrc);
            ValidationReport vr = validate(net);
            if (!vr.ok()) {
                std::cerr << vr.to_string();
                return kExitDomain;
            }
            ParsedPattern pp = parse_pattern(net, fpattern);
            MarketState mu = steady_state(net, pp.pattern);
            std::vector<double> init(net.middlemen().size(), 0.0);
            if (finit == "full") init.assign(init.size(), 1.0);
            else if (finit == "stationary") init = mu.mu;
            else if (finit != "zero") throw CliError(kExitDomain, "unknown --init: " + finit);
            auto traj = fluid_integrate(net, pp.pattern, init, fhorizon, fstep);
            if (fout.empty()) {
                write_csv(traj, net, std::cout);
            } else {
                std::ofstream f(fout);
                if (!f) throw CliError(kExitIo, "cannot write " + fout);
                write_csv(traj, net, f);
                std::cout << "terminal residual vs steady state: " << traj.terminal_residual << '\n';
            }
            return kExitOk;
        }
        if (*builtin_cmd) {
            TradingNetwork net = builtin(bname);
            if (bout.empty())
                std::cout << network_to_json(net).dump(2) << '\n';
            else
                save_network(net, bout);
            return kExitOk;
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const SingularSupportError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitOk;
}

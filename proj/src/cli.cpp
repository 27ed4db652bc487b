#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "transactive/consensus.hpp"
#include "transactive/errors.hpp"
#include "transactive/oracle.hpp"
#include "transactive/scenario.hpp"

namespace transactive {

namespace {


double initial_price(const Scenario& s) {
    if (s.fixed_price) return *s.fixed_price;
    AggregateVector agg;
    for (const auto& a : s.agents) {
        const auto part = init_aggregate(a);
        agg.demand += part.demand;
        agg.generation += part.generation;
        agg.weighted_generation += part.weighted_generation;
    }
    return system_price(agg).value;
}

void print_solution(std::ostream& out, const std::vector<AgentState>& agents, const DispatchSolution& sol,
                    double price) {
    fmt::print(out, "price {}\nmultiplier {}\nobjective {}\nsocial_welfare {}\n", price, sol.multiplier,
               sol.objective, social_welfare(agents, sol.power, price));
    fmt::print(out, "{:>8} {:>10} {:>14}\n", "agent", "kind", "power");
    for (const auto& a : agents) {
        fmt::print(out, "{:>8} {:>10} {:>14.6f}\n", a.id.value, to_string(a.kind()), sol.power.at(a.id));
    }
}

int cmd_run(const std::string& path, const std::string& out_csv, const std::string& plot_dir) {
    const Scenario s = load_scenario(path);
    std::vector<IterationRecord> records;
    try {
        records = run_scenario(s);
    } catch (const RunAborted& e) {
        if (!out_csv.empty()) write_records(e.records(), out_csv);
        throw;
    }
    if (!out_csv.empty()) write_records(records, out_csv);
    if (!plot_dir.empty()) write_plots(records, plot_dir);
    if (records.empty()) {
        fmt::print("{}: overlay only, no iterations\n", s.name);
    } else {
        const auto& last = records.back();
        fmt::print("{}: {} iterations, price {}, P_G {}, P_D {}, imbalance {}\n", s.name, records.size(),
                   last.price, last.generation, last.demand, last.imbalance);
    }
    return 0;
}

int cmd_verify(const std::string& path, double tolerance) {
    const Scenario s = load_scenario(path);
    std::optional<Engine> engine;
    const auto records = run_scenario(s, {}, engine);
    if (records.empty()) throw Error("verify needs at least one iteration");
    const auto& last = records.back();
    // Oracle at the final agent set and at the price the agents saw last.
    const auto agents = engine->agent_list();
    const double price = s.fixed_price ? *s.fixed_price : last.price;
    const DispatchSolution sol = solve_welfare(agents, price);

    double demand = 0, generation = 0, max_rel = 0, max_abs = 0;
    fmt::print("{:>8} {:>10} {:>14} {:>14} {:>12} {:>10}\n", "agent", "kind", "simulated", "oracle", "abs_gap",
               "rel_gap");
    for (const auto& a : agents) {
        const double opt = sol.power.at(a.id);
        const double gap = std::abs(a.power - opt);
        const double rel = gap / std::max(std::abs(opt), 1.0);
        max_abs = std::max(max_abs, gap);
        max_rel = std::max(max_rel, rel);
        if (a.is_generator()) generation += a.power; else demand += a.power + a.base_load();
        fmt::print("{:>8} {:>10} {:>14.6f} {:>14.6f} {:>12.6g} {:>10.3g}\n", a.id.value, to_string(a.kind()),
                   a.power, opt, gap, rel);
    }
    const double imbalance = generation - demand;
    fmt::print("price {}\nmax_abs_gap {}\nmax_rel_gap {}\nfinal_imbalance {}\nrelative_imbalance {}\n", price,
               max_abs, max_rel, imbalance, std::abs(imbalance) / std::max(demand, 1.0));
    // A gap counts when it exceeds both the relative tolerance and 1 W.
    bool ok = true;
    for (const auto& a : agents) {
        const double opt = sol.power.at(a.id);
        if (std::abs(a.power - opt) > std::max(tolerance * std::abs(opt), 1.0)) ok = false;
    }
    fmt::print("verdict {}\n", ok ? "within tolerance" : "OUTSIDE tolerance");
    return ok ? 0 : 2;
}

int cmd_tree(const std::string& path) {
    const Scenario s = load_scenario(path);
    std::set<AgentId> nodes;
    for (const auto& a : s.agents) nodes.insert(a.id);
    Network net(Topology(nodes, s.edges));
    MdstStats stats;
    const TreeOverlay tree = run_mdst_protocol(net, &stats);
    fmt::print("center {}\ntree_diameter {}\ngraph_diameter {}\nrounds {}\nparents\n", tree.root.value,
               tree.tree_diameter, diameter(net.topology()), stats.total_rounds);
    for (const auto& [a, p] : tree.parent) fmt::print("  {} -> {}\n", a.value, p.value);
    return 0;
}

int cmd_oracle(const std::string& path) {
    const Scenario s = load_scenario(path);
    const double price = initial_price(s);
    const DispatchSolution sol = solve_welfare(s.agents, price);
    print_solution(std::cout, s.agents, sol, price);
    return 0;
}

}  // namespace

void configure_logging() {
    static bool done = false;
    if (done) return;
    done = true;
    auto logger = spdlog::stderr_color_mt("transactive");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("TRANSACTIVE_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept real level names.
        if (level != spdlog::level::off || std::string(env) == "off") {
            spdlog::set_level(level);
        } else {
            spdlog::warn("ignoring TRANSACTIVE_LOG='{}'", env);
        }
    }
}

int cli_main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Distributed transactive control simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_csv, plot_dir;
    double tolerance = 0.01;

    auto* run = app.add_subcommand("run", "simulate a scenario");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", out_csv, "CSV file for the per-iteration records");
    run->add_option("--plot", plot_dir, "directory for SVG charts");

    auto* verify = app.add_subcommand("verify", "simulate, then compare with the centralized optimum");
    verify->add_option("scenario", scenario_path, "scenario file")->required();
    verify->add_option("--tolerance", tolerance, "relative gap allowed per agent (1 W floor)");

    auto* tree = app.add_subcommand("tree", "build the spanning-tree overlay and print it");
    tree->add_option("scenario", scenario_path, "scenario file")->required();

    auto* oracle = app.add_subcommand("oracle", "centralized solution at the initial price");
    oracle->add_option("scenario", scenario_path, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_csv, plot_dir);
        if (verify->parsed()) return cmd_verify(scenario_path, tolerance);
        if (tree->parsed()) return cmd_tree(scenario_path);
        if (oracle->parsed()) return cmd_oracle(scenario_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace transactive

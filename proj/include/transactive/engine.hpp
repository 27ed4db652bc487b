#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "transactive/agents.hpp"
#include "transactive/errors.hpp"
#include "transactive/events.hpp"
#include "transactive/graph.hpp"
#include "transactive/mdst.hpp"
#include "transactive/network.hpp"

namespace transactive {

/// alpha_k = min(cap, alpha0 / (k - restart + 1)).
struct StepsizeSchedule {
    double alpha0 = 1.0;
    double cap = std::numeric_limits<double>::infinity();
    std::uint64_t restart = 0;

    double at(std::uint64_t k) const;
};

/// min over agents of min(|rate_min|, rate_max) / gradient_bound.
double stepsize_cap(const std::vector<AgentState>& agents, double price);

struct AgentRecord {
    AgentId id;
    AgentKind kind = AgentKind::Generator;
    double power = 0.0;
    double base_load = 0.0;
    bool box_violation = false;   // power outside its box
    bool rate_violation = false;  // the update that produced this power broke a rate bound
};

/// State P(k) at the start of iteration k, with the aggregates every agent
/// computed from it.
struct IterationRecord {
    std::uint64_t k = 0;
    std::vector<AgentRecord> agents;
    double price = 0.0;
    bool price_degenerate = false;
    double generation = 0.0;  // P_G
    double demand = 0.0;      // P_D
    double social_welfare = 0.0;
    double imbalance = 0.0;  // P_G - P_D
    double alpha = 0.0;
    double multiplier = 0.0;
    std::uint64_t round = 0;  // network round counter after the iteration
    AgentId tree_root;
    HopCount tree_diameter = 0;
    std::uint64_t mdst_builds = 0;
};

struct EngineOptions {
    double alpha0 = 1.0;
    std::optional<double> fixed_price;
};

/// Algorithm-2 driver. Agents are isolated state machines; everything one
/// agent learns about the others arrives through the network.
class Engine {
public:
    Engine(Topology topology, std::vector<AgentState> agents, EngineOptions options);

    /// Builds the overlay over the current topology and installs it.
    const TreeOverlay& run_mdst_phase();

    /// One outer iteration: power exchange, aggregate sweep, power-sum sweep,
    /// then the local step, projections and update at every agent. Either all
    /// agents advance or, on error, none do.
    IterationRecord run_iteration();

    /// Base-load changes edit one consumer. Joins and leaves rebuild the
    /// overlay, reset every multiplier copy and restart the stepsize.
    void apply_event(const ScenarioEvent& event);

    std::uint64_t iteration() const noexcept { return k_; }
    const std::map<AgentId, AgentState>& agents() const noexcept { return agents_; }
    std::vector<AgentState> agent_list() const;
    const Topology& topology() const noexcept { return network_.topology(); }
    const TreeOverlay& tree() const;
    std::uint64_t mdst_builds() const noexcept { return mdst_builds_; }
    const StepsizeSchedule& schedule() const noexcept { return schedule_; }
    std::uint64_t round() const noexcept { return network_.round(); }
    const MdstStats& last_mdst_stats() const noexcept { return mdst_stats_; }
    /// Largest |power change| of the last iteration.
    double last_max_delta() const noexcept { return last_max_delta_; }

    void set_message_observer(Network::Observer observer);

private:
    void membership_changed();

    EngineOptions options_;
    Network network_;
    std::map<AgentId, AgentState> agents_;
    std::map<AgentId, BalanceMultiplier> multipliers_;
    std::map<AgentId, bool> rate_flags_;
    std::optional<TreeOverlay> tree_;
    StepsizeSchedule schedule_;
    bool cap_pending_ = true;
    std::uint64_t k_ = 0;
    std::uint64_t mdst_builds_ = 0;
    MdstStats mdst_stats_;
    double last_max_delta_ = 0.0;
};

/// Thrown by run_scenario; carries every record produced before the failure.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, std::vector<IterationRecord> records)
        : Error(what), records_(std::move(records)) {}
    const std::vector<IterationRecord>& records() const noexcept { return records_; }

private:
    std::vector<IterationRecord> records_;
};

struct RunOptions {
    Network::Observer observer;
};

/// MDST phase, then iterations 0..max_iterations-1 with events applied at their
/// boundaries. Stops early once every agent moved less than epsilon for 50
/// consecutive iterations and no event is still pending.
std::vector<IterationRecord> run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Same, also returning the final engine for inspection.
std::vector<IterationRecord> run_scenario(const Scenario& scenario, const RunOptions& options,
                                          std::optional<Engine>& engine_out);

}  // namespace transactive

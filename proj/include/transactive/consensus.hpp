#pragma once

#include <map>
#include <vector>

#include "transactive/agents.hpp"
#include "transactive/mdst.hpp"
#include "transactive/network.hpp"

namespace transactive {

/// One agent's position in a finite-time sum sweep over the tree.
///
/// Step 0 adds the neighbors' values to the own value. Every later step takes
/// the neighbors' current values plus (1 - degree) times the own value from the
/// step before. After exactly `horizon` steps the current value is the global
/// sum. Vector-valued so one sweep can carry several sums at once.
class SumSweepState {
public:
    SumSweepState(std::vector<double> initial, std::size_t degree, HopCount horizon);

    const std::vector<double>& current() const noexcept { return curr_; }
    HopCount step() const noexcept { return q_; }
    HopCount horizon() const noexcept { return horizon_; }
    bool done() const noexcept { return q_ == horizon_; }

    /// Advance one step given the element-wise sum of the neighbors' current values.
    void advance(const std::vector<double>& neighbor_sum);

private:
    std::vector<double> prev_;
    std::vector<double> curr_;
    HopCount q_ = 0;
    HopCount horizon_;
    double degree_;
};

AggregateVector init_aggregate(const AgentState& agent);

/// Runs a sweep over `network`, which must have `tree` installed. Takes exactly
/// tree.tree_diameter rounds, using tree links only.
std::map<AgentId, std::vector<double>> run_sweep(Network& network, const TreeOverlay& tree,
                                                 const std::map<AgentId, std::vector<double>>& initial);

/// Convenience wrapper on a private network built from the tree itself.
std::map<AgentId, double> finite_time_sum(const TreeOverlay& tree,
                                          const std::map<AgentId, double>& initial);

std::map<AgentId, AggregateVector> gather_globals(Network& network, const TreeOverlay& tree,
                                                  const std::map<AgentId, AgentState>& agents);
std::map<AgentId, AggregateVector> gather_globals(const TreeOverlay& tree,
                                                  const std::map<AgentId, AgentState>& agents);

std::map<AgentId, double> power_sum_sweep(Network& network, const TreeOverlay& tree,
                                          const std::map<AgentId, double>& signed_powers);
std::map<AgentId, double> power_sum_sweep(const TreeOverlay& tree,
                                          const std::map<AgentId, double>& signed_powers);

}  // namespace transactive

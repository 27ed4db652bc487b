#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "transactive/agents.hpp"
#include "transactive/graph.hpp"

namespace transactive {

struct BaseLoadSet {
    AgentId consumer;
    double watts = 0.0;

    friend bool operator==(const BaseLoadSet&, const BaseLoadSet&) = default;
};

/// New agent with a feasible initial power and the edges that attach it.
struct Join {
    AgentState agent;
    std::vector<Edge> edges;

    friend bool operator==(const Join&, const Join&) = default;
};

struct Leave {
    std::vector<AgentId> agents;

    friend bool operator==(const Leave&, const Leave&) = default;
};

/// Applied at the boundary just before iteration `at_iteration` runs.
struct ScenarioEvent {
    std::uint64_t at_iteration = 1;
    std::variant<BaseLoadSet, Join, Leave> action;

    friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

struct Scenario {
    int format_version = 1;
    std::string name;
    std::uint64_t seed = 0;
    std::uint64_t max_iterations = 0;
    double alpha0 = 1.0;
    double epsilon = 0.0;  // 0 disables the early stop
    std::optional<double> fixed_price;
    std::vector<AgentState> agents;
    std::vector<Edge> edges;  // always explicit once loaded
    std::vector<ScenarioEvent> events;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace transactive

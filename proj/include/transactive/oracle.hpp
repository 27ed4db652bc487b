#pragma once

#include <map>
#include <vector>

#include "transactive/agents.hpp"

namespace transactive {

struct DispatchSolution {
    std::map<AgentId, double> power;
    double multiplier = 0.0;  // shadow price of the balance constraint
    double objective = 0.0;   // dispatch_objective at the solution
    std::size_t iterations = 0;
};

/// Sum of consumer utilities minus sum of generation costs.
double social_welfare(const std::vector<AgentState>& agents, const std::map<AgentId, double>& powers,
                      double price);

/// Sum of consumer utilities plus sum of generator terms C(p). This is the
/// strictly concave objective whose maximizer the distributed iteration reaches;
/// C is concave in p, so the printed welfare (utilities minus costs) is not.
double dispatch_objective(const std::vector<AgentState>& agents,
                          const std::map<AgentId, double>& powers, double price);

/// Maximizes dispatch_objective subject to the boxes and
/// sum(base_load + consumer power) = sum(generator power), by bisection on the
/// balance multiplier. Throws InfeasibleError when the achievable demand and
/// generation ranges do not overlap.
DispatchSolution solve_welfare(const std::vector<AgentState>& agents, double price);

/// Closed-form best responses at a given multiplier.
double consumer_response(const ConsumerParams& params, double multiplier, double price);
double generator_response(const GeneratorParams& params, double multiplier);

}  // namespace transactive

#include "transactive/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transactive/errors.hpp"

namespace transactive {

double social_welfare(const std::vector<AgentState>& agents, const std::map<AgentId, double>& powers,
                      double price) {
    double total = 0.0;
    for (const auto& a : agents) {
        const double p = powers.at(a.id);
        total += a.is_generator() ? -generation_cost(a.generator(), p)
                                  : consumer_utility(a.consumer(), p, price);
    }
    return total;
}

double dispatch_objective(const std::vector<AgentState>& agents,
                          const std::map<AgentId, double>& powers, double price) {
    double total = 0.0;
    for (const auto& a : agents) {
        const double p = powers.at(a.id);
        total += a.is_generator() ? generation_cost(a.generator(), p)
                                  : consumer_utility(a.consumer(), p, price);
    }
    return total;
}

double consumer_response(const ConsumerParams& c, double multiplier, double price) {
    const double stationary = c.p_max * (1.0 - multiplier * price / c.value) / 2.0;
    return std::clamp(stationary, c.p_min, c.p_max);
}

double generator_response(const GeneratorParams& g, double multiplier) {
    const double stationary = g.p_max * (1.0 + multiplier * g.cost) / 2.0;
    return std::clamp(stationary, g.p_min, g.p_max);
}

namespace {

struct Balance {
    double demand = 0.0;
    double generation = 0.0;
    double residual() const { return demand - generation; }
};

Balance evaluate(const std::vector<AgentState>& agents, double lambda, double price,
                 std::map<AgentId, double>* powers) {
    Balance b;
    for (const auto& a : agents) {
        double p;
        if (a.is_generator()) {
            p = generator_response(a.generator(), lambda);
            b.generation += p;
        } else {
            p = consumer_response(a.consumer(), lambda, price);
            b.demand += p + a.consumer().base_load;
        }
        if (powers) (*powers)[a.id] = p;
    }
    return b;
}

}  // namespace

DispatchSolution solve_welfare(const std::vector<AgentState>& agents, double price) {
    if (!(price > 0)) throw NonpositivePriceError("price must be positive, got " + std::to_string(price));
    bool any_generator = false;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& a : agents) {
        // Multiplier values at which the agent's best response hits each corner.
        double at_min, at_max;
        if (a.is_generator()) {
            any_generator = true;
            const auto& g = a.generator();
            at_min = -(1.0 - 2.0 * g.p_min / g.p_max) / g.cost;
            at_max = -(1.0 - 2.0 * g.p_max / g.p_max) / g.cost;
        } else {
            const auto& c = a.consumer();
            at_min = (c.value / price) * (1.0 - 2.0 * c.p_min / c.p_max);
            at_max = (c.value / price) * (1.0 - 2.0 * c.p_max / c.p_max);
        }
        lo = std::min({lo, at_min, at_max});
        hi = std::max({hi, at_min, at_max});
    }
    if (!any_generator) throw ZeroGeneratorError("no generators");

    // residual(lambda) = demand - generation is non-increasing in lambda.
    const Balance at_lo = evaluate(agents, lo, price, nullptr);
    const Balance at_hi = evaluate(agents, hi, price, nullptr);
    if (at_lo.residual() < 0) {
        throw InfeasibleError("maximum demand is below minimum generation", at_lo.demand,
                              at_lo.generation);
    }
    if (at_hi.residual() > 0) {
        throw InfeasibleError("minimum demand exceeds maximum generation", at_hi.generation,
                              at_hi.demand);
    }

    DispatchSolution sol;
    double mid = 0.5 * (lo + hi);
    for (sol.iterations = 0; sol.iterations < 200; ++sol.iterations) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval exhausted in double precision
        const Balance b = evaluate(agents, mid, price, nullptr);
        if (std::abs(b.residual()) <= 1e-9 * std::max(b.demand, 1.0)) break;
        if (b.residual() > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    evaluate(agents, mid, price, &sol.power);
    sol.multiplier = mid;
    sol.objective = dispatch_objective(agents, sol.power, price);
    return sol;
}

}  // namespace transactive

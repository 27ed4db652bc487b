#pragma once

#include <string>
#include <variant>
#include <vector>

#include "transactive/graph.hpp"

namespace transactive {

/// Globally summed quantities, one copy held by every agent after a sweep.
struct AggregateVector {
    double demand = 0.0;               // P_D, including base loads
    double generation = 0.0;           // P_G
    double weighted_generation = 0.0;  // C_G = sum of P_g * c over generators
    std::size_t generators = 0;        // N
    std::size_t consumers = 0;         // M

    std::vector<double> to_vector() const;
    static AggregateVector from_vector(const std::vector<double>& v);

    friend bool operator==(const AggregateVector&, const AggregateVector&) = default;
};

enum class AgentKind { Generator, Consumer };

const char* to_string(AgentKind kind);

struct GeneratorParams {
    double cost = 1.0;  // c
    double p_min = 0.0;
    double p_max = 0.0;
    double rate_min = 0.0;
    double rate_max = 0.0;

    friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

struct ConsumerParams {
    double value = 1.0;  // V
    double p_min = 0.0;
    double p_max = 0.0;
    double rate_min = 0.0;
    double rate_max = 0.0;
    double base_load = 0.0;  // exogenous demand, never optimized

    friend bool operator==(const ConsumerParams&, const ConsumerParams&) = default;
};

struct AgentState {
    AgentId id;
    std::variant<GeneratorParams, ConsumerParams> params;
    double power = 0.0;       // controllable component
    double power_prev = 0.0;

    AgentKind kind() const noexcept {
        return std::holds_alternative<GeneratorParams>(params) ? AgentKind::Generator
                                                               : AgentKind::Consumer;
    }
    bool is_generator() const noexcept { return kind() == AgentKind::Generator; }
    const GeneratorParams& generator() const { return std::get<GeneratorParams>(params); }
    const ConsumerParams& consumer() const { return std::get<ConsumerParams>(params); }

    double p_min() const;
    double p_max() const;
    double rate_min() const;
    double rate_max() const;
    double base_load() const;  // 0 for generators

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

AgentState make_generator(AgentId id, const GeneratorParams& params, double power);
AgentState make_consumer(AgentId id, const ConsumerParams& params, double power);

/// Empty when the parameters are usable; otherwise one message per problem.
std::vector<std::string> validate(const GeneratorParams& params);
std::vector<std::string> validate(const ConsumerParams& params);
std::vector<std::string> validate(const AgentState& state);

double generation_cost(const GeneratorParams& params, double p);
double consumer_utility(const ConsumerParams& params, double p, double price);

struct SystemPrice {
    double value = 0.0;
    bool degenerate = false;  // zero numerator: generation free or absent
};

/// C_G / P_D. Throws ZeroDemandError when P_D is not positive.
SystemPrice system_price(const AggregateVector& agg);

/// Derivative of the agent's term of the minimization objective, taken with
/// respect to its signed power (consumers +P, generators -P).
double local_gradient(const AgentState& state, double price);

/// Largest |local_gradient| over the agent's box at the given price.
double gradient_bound(const AgentState& state, double price);

double signed_power(const AgentState& state);
double from_signed(const AgentState& state, double signed_watts);

double gradient_step(double consensus_avg, double alpha, double grad);

double box_project(const AgentState& state, double z);

/// True when |P_G - P_D| <= 1e-9 * max(P_G, P_D, 1).
bool balance_holds(const AggregateVector& agg);

/// Generator balance correction: z1 - (P_G - P_D) / N unless balance already holds.
double balance_project(double z1, const AggregateVector& agg);

struct UpdateResult {
    AgentState state;
    double delta = 0.0;
    bool rate_violation = false;
};

/// Moves power to power_prev and installs new_power. Rate violations are
/// flagged, not clamped.
UpdateResult apply_update(const AgentState& state, double new_power);

/// Local copy of the balance multiplier.
///
/// Each agent rebuilds the same value from public sweep results only: the
/// change of the swept power sum between iterations, minus whatever part of it
/// the generators' balance correction caused, divided by the step that
/// produced it.
class BalanceMultiplier {
public:
    double value() const noexcept { return value_; }

    /// Feed iteration k's swept power sum before stepping.
    void observe(double power_sum, std::size_t agent_count);

    /// Record the step taken at iteration k; shortfall is P_D - P_G.
    void record(double power_sum, double shortfall, double alpha, bool balance_applied);

    /// Forget history and return to zero (membership change).
    void reset();

private:
    double value_ = 0.0;
    bool has_prev_ = false;
    double prev_sum_ = 0.0;
    double prev_shortfall_ = 0.0;
    double prev_alpha_ = 0.0;
    bool prev_applied_ = false;
};

}  // namespace transactive

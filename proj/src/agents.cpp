#include "transactive/agents.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "transactive/errors.hpp"

namespace transactive {

std::vector<double> AggregateVector::to_vector() const {
    return {demand, generation, weighted_generation, static_cast<double>(generators),
            static_cast<double>(consumers)};
}

AggregateVector AggregateVector::from_vector(const std::vector<double>& v) {
    if (v.size() != 5) throw ProtocolError("aggregate vector needs 5 components");
    return {v[0], v[1], v[2], static_cast<std::size_t>(std::llround(v[3])),
            static_cast<std::size_t>(std::llround(v[4]))};
}

const char* to_string(AgentKind kind) {
    return kind == AgentKind::Generator ? "generator" : "consumer";
}

double AgentState::p_min() const {
    return std::visit([](const auto& p) { return p.p_min; }, params);
}
double AgentState::p_max() const {
    return std::visit([](const auto& p) { return p.p_max; }, params);
}
double AgentState::rate_min() const {
    return std::visit([](const auto& p) { return p.rate_min; }, params);
}
double AgentState::rate_max() const {
    return std::visit([](const auto& p) { return p.rate_max; }, params);
}
double AgentState::base_load() const {
    return is_generator() ? 0.0 : consumer().base_load;
}

AgentState make_generator(AgentId id, const GeneratorParams& params, double power) {
    return AgentState{id, params, power, power};
}

AgentState make_consumer(AgentId id, const ConsumerParams& params, double power) {
    return AgentState{id, params, power, power};
}

namespace {

void check_common(std::vector<std::string>& issues, double p_min, double p_max, double t_min,
                  double t_max) {
    if (!std::isfinite(p_min) || p_min < 0) issues.push_back("p_min must be >= 0");
    if (!std::isfinite(p_max) || !(p_max > p_min)) issues.push_back("p_max must exceed p_min");
    if (!std::isfinite(t_min) || !(t_min < 0)) issues.push_back("rate_min must be negative");
    if (!std::isfinite(t_max) || !(t_max > 0)) issues.push_back("rate_max must be positive");
}

}  // namespace

std::vector<std::string> validate(const GeneratorParams& p) {
    std::vector<std::string> issues;
    if (!std::isfinite(p.cost) || !(p.cost > 0)) issues.push_back("cost must be positive");
    check_common(issues, p.p_min, p.p_max, p.rate_min, p.rate_max);
    return issues;
}

std::vector<std::string> validate(const ConsumerParams& p) {
    std::vector<std::string> issues;
    if (!std::isfinite(p.value) || !(p.value > 0)) issues.push_back("value must be positive");
    check_common(issues, p.p_min, p.p_max, p.rate_min, p.rate_max);
    if (!std::isfinite(p.base_load) || p.base_load < 0) issues.push_back("base_load must be >= 0");
    return issues;
}

std::vector<std::string> validate(const AgentState& state) {
    auto issues = std::visit([](const auto& p) { return validate(p); }, state.params);
    if (state.id.value == 0) issues.push_back("id must be a positive integer");
    if (!std::isfinite(state.power) || state.power < state.p_min() || state.power > state.p_max()) {
        issues.push_back(fmt::format("initial power {} outside [{}, {}] (initial points must be feasible)",
                                     state.power, state.p_min(), state.p_max()));
    }
    return issues;
}

double generation_cost(const GeneratorParams& params, double p) {
    return (p - p * p / params.p_max) / params.cost;
}

double consumer_utility(const ConsumerParams& params, double p, double price) {
    if (!(price > 0)) throw NonpositivePriceError("price must be positive, got " + std::to_string(price));
    return (params.value / price) * (p - p * p / params.p_max);
}

SystemPrice system_price(const AggregateVector& agg) {
    if (!(agg.demand > 0)) throw ZeroDemandError("total demand is zero; price undefined");
    const double value = agg.weighted_generation / agg.demand;
    return {value, agg.weighted_generation == 0.0};
}

double local_gradient(const AgentState& state, double price) {
    const double p = state.power;
    if (state.is_generator()) {
        const auto& g = state.generator();
        return (1.0 - 2.0 * p / g.p_max) / g.cost;
    }
    if (!(price > 0)) throw NonpositivePriceError("price must be positive, got " + std::to_string(price));
    const auto& c = state.consumer();
    return -(c.value / price) * (1.0 - 2.0 * p / c.p_max);
}

double gradient_bound(const AgentState& state, double price) {
    // |1 - 2p/p_max| over [p_min, p_max] with p_min >= 0 peaks at p = p_max.
    const double shape = std::max(std::abs(1.0 - 2.0 * state.p_min() / state.p_max()), 1.0);
    if (state.is_generator()) return shape / state.generator().cost;
    if (!(price > 0)) throw NonpositivePriceError("price must be positive, got " + std::to_string(price));
    return shape * state.consumer().value / price;
}

double signed_power(const AgentState& state) {
    return state.is_generator() ? -state.power : state.power;
}

double from_signed(const AgentState& state, double signed_watts) {
    return state.is_generator() ? -signed_watts : signed_watts;
}

double gradient_step(double consensus_avg, double alpha, double grad) {
    return consensus_avg - alpha * grad;
}

double box_project(const AgentState& state, double z) {
    return std::clamp(z, state.p_min(), state.p_max());
}

bool balance_holds(const AggregateVector& agg) {
    const double scale = std::max({agg.generation, agg.demand, 1.0});
    return std::abs(agg.generation - agg.demand) <= 1e-9 * scale;
}

double balance_project(double z1, const AggregateVector& agg) {
    if (agg.generators == 0) throw ZeroGeneratorError("no generators to restore balance");
    if (balance_holds(agg)) return z1;
    return z1 - (agg.generation - agg.demand) / static_cast<double>(agg.generators);
}

UpdateResult apply_update(const AgentState& state, double new_power) {
    if (!std::isfinite(new_power)) {
        throw Error("non-finite power update for agent " + to_string(state.id));
    }
    UpdateResult out{state, new_power - state.power, false};
    out.state.power_prev = state.power;
    out.state.power = new_power;
    out.rate_violation = out.delta < state.rate_min() || out.delta > state.rate_max();
    return out;
}

void BalanceMultiplier::observe(double power_sum, std::size_t agent_count) {
    if (!has_prev_ || agent_count == 0) return;
    const double correction = prev_applied_ ? prev_shortfall_ : 0.0;
    value_ += (power_sum - prev_sum_ + correction) / (prev_alpha_ * static_cast<double>(agent_count));
}

void BalanceMultiplier::record(double power_sum, double shortfall, double alpha, bool balance_applied) {
    has_prev_ = true;
    prev_sum_ = power_sum;
    prev_shortfall_ = shortfall;
    prev_alpha_ = alpha;
    prev_applied_ = balance_applied;
}

void BalanceMultiplier::reset() { *this = BalanceMultiplier{}; }

}  // namespace transactive

#include "transactive/engine.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "transactive/consensus.hpp"
#include "transactive/oracle.hpp"

namespace transactive {

double StepsizeSchedule::at(std::uint64_t k) const {
    const double decay = alpha0 / static_cast<double>(k - restart + 1);
    return std::min(cap, decay);
}

double stepsize_cap(const std::vector<AgentState>& agents, double price) {
    double cap = std::numeric_limits<double>::infinity();
    for (const auto& a : agents) {
        const double rate = std::min(std::abs(a.rate_min()), a.rate_max());
        const double bound = gradient_bound(a, price);
        if (bound > 0) cap = std::min(cap, rate / bound);
    }
    return cap;
}

Engine::Engine(Topology topology, std::vector<AgentState> agents, EngineOptions options)
    : options_(options), network_(std::move(topology)) {
    std::vector<std::string> issues;
    for (auto& a : agents) {
        for (auto& issue : validate(a)) issues.push_back("agent " + to_string(a.id) + ": " + issue);
        if (!network_.topology().contains(a.id)) {
            issues.push_back("agent " + to_string(a.id) + " is not in the topology");
        }
        if (!agents_.emplace(a.id, a).second) issues.push_back("duplicate agent " + to_string(a.id));
    }
    if (agents_.size() != network_.topology().size()) {
        issues.push_back("topology has nodes without agent parameters");
    }
    if (!(options_.alpha0 > 0)) issues.push_back("alpha0 must be positive");
    if (options_.fixed_price && !(*options_.fixed_price > 0)) issues.push_back("fixed_price must be positive");
    if (!issues.empty()) throw ValidationError(std::move(issues));
    require_connected(network_.topology());
    for (const auto& [id, a] : agents_) {
        multipliers_.emplace(id, BalanceMultiplier{});
        rate_flags_.emplace(id, false);
    }
    schedule_.alpha0 = options_.alpha0;
}

std::vector<AgentState> Engine::agent_list() const {
    std::vector<AgentState> out;
    for (const auto& [id, a] : agents_) out.push_back(a);
    return out;
}

const TreeOverlay& Engine::tree() const {
    if (!tree_) throw ProtocolError("no overlay built yet");
    return *tree_;
}

void Engine::set_message_observer(Network::Observer observer) {
    network_.set_observer(std::move(observer));
}

const TreeOverlay& Engine::run_mdst_phase() {
    network_.clear_tree();
    require_connected(network_.topology());
    tree_ = run_mdst_protocol(network_, &mdst_stats_);
    ++mdst_builds_;
    spdlog::debug("overlay built: root {} diameter {} in {} rounds", tree_->root.value,
                  tree_->tree_diameter, mdst_stats_.total_rounds);
    return *tree_;
}

IterationRecord Engine::run_iteration() {
    if (!tree_) run_mdst_phase();
    const TreeOverlay& tree = *tree_;

    // (a) neighbors exchange current powers.
    std::map<AgentId, double> signed_powers;
    for (const auto& [id, a] : agents_) signed_powers.emplace(id, signed_power(a));
    for (const auto& [id, a] : agents_) {
        for (AgentId b : tree.tree_neighbors.at(id)) {
            network_.send(id, b, PowerValue{signed_powers.at(id)}, Channel::Tree);
        }
    }
    network_.deliver();
    for (const auto& [id, a] : agents_) {
        for (const auto& m : network_.take(id)) {
            if (!std::holds_alternative<PowerValue>(m.payload)) {
                throw ProtocolError("unexpected payload during power exchange");
            }
        }
    }
    network_.end_round();

    // (b) aggregates and (c) the signed power sum.
    const auto globals = gather_globals(network_, tree, agents_);
    const auto sums = power_sum_sweep(network_, tree, signed_powers);

    const AgentId root = tree.root;
    const AggregateVector& root_agg = globals.at(root);
    const SystemPrice root_price =
        options_.fixed_price ? SystemPrice{*options_.fixed_price, false} : system_price(root_agg);

    const std::vector<AgentState> current = agent_list();
    if (cap_pending_) {
        // A schedule parameter, fixed from box and rate bounds when the run or a
        // membership epoch starts.
        schedule_.cap = stepsize_cap(current, root_price.value);
        cap_pending_ = false;
        spdlog::debug("stepsize cap {} from k = {}", schedule_.cap, k_);
    }
    const double alpha = schedule_.at(k_);

    // (d)-(g) at every agent, into scratch copies so a failure leaves no trace.
    std::map<AgentId, AgentState> next_agents;
    std::map<AgentId, BalanceMultiplier> next_multipliers = multipliers_;
    std::map<AgentId, bool> next_flags;
    double max_delta = 0.0;
    for (const auto& [id, a] : agents_) {
        const AggregateVector& agg = globals.at(id);
        const double price = options_.fixed_price ? *options_.fixed_price : system_price(agg).value;
        BalanceMultiplier& lambda = next_multipliers.at(id);
        lambda.observe(sums.at(id), agg.generators + agg.consumers);

        const double grad = local_gradient(a, price);
        const double z_signed = gradient_step(signed_power(a) - alpha * lambda.value(), alpha, grad);
        double z = box_project(a, from_signed(a, z_signed));
        const bool correct = !balance_holds(agg);
        if (a.is_generator()) z = balance_project(z, agg);
        lambda.record(sums.at(id), agg.demand - agg.generation, alpha, correct);

        UpdateResult up = apply_update(a, z);
        max_delta = std::max(max_delta, std::abs(up.delta));
        next_flags.emplace(id, up.rate_violation);
        next_agents.emplace(id, std::move(up.state));
    }

    IterationRecord rec;
    rec.k = k_;
    std::map<AgentId, double> powers;
    for (const auto& [id, a] : agents_) {
        AgentRecord ar{id, a.kind(), a.power, a.base_load(),
                       a.power < a.p_min() || a.power > a.p_max(), rate_flags_.at(id)};
        rec.agents.push_back(ar);
        powers.emplace(id, a.power);
    }
    rec.price = root_price.value;
    rec.price_degenerate = root_price.degenerate;
    rec.generation = root_agg.generation;
    rec.demand = root_agg.demand;
    rec.social_welfare = rec.price > 0 ? social_welfare(current, powers, rec.price)
                                       : std::numeric_limits<double>::quiet_NaN();
    rec.imbalance = root_agg.generation - root_agg.demand;
    rec.alpha = alpha;
    rec.multiplier = next_multipliers.at(root).value();
    rec.round = network_.round();
    rec.tree_root = root;
    rec.tree_diameter = tree.tree_diameter;
    rec.mdst_builds = mdst_builds_;

    agents_ = std::move(next_agents);
    multipliers_ = std::move(next_multipliers);
    rate_flags_ = std::move(next_flags);
    ++k_;
    last_max_delta_ = max_delta;
    return rec;
}

void Engine::membership_changed() {
    run_mdst_phase();
    for (auto& [id, m] : multipliers_) m.reset();
    schedule_.restart = k_;
    cap_pending_ = true;
}

void Engine::apply_event(const ScenarioEvent& event) {
    if (const auto* e = std::get_if<BaseLoadSet>(&event.action)) {
        auto it = agents_.find(e->consumer);
        if (it == agents_.end()) throw UnknownAgentError("unknown agent " + to_string(e->consumer));
        if (it->second.is_generator()) {
            throw ValidationError({"base load set on generator " + to_string(e->consumer)});
        }
        if (!std::isfinite(e->watts) || e->watts < 0) {
            throw ValidationError({"base load must be >= 0 for agent " + to_string(e->consumer)});
        }
        std::get<ConsumerParams>(it->second.params).base_load = e->watts;
        spdlog::info("k={} base load of {} set to {}", k_, e->consumer.value, e->watts);
        return;
    }
    if (const auto* e = std::get_if<Join>(&event.action)) {
        const AgentId id = e->agent.id;
        if (agents_.contains(id)) throw ValidationError({"agent " + to_string(id) + " already present"});
        auto issues = validate(e->agent);
        if (!issues.empty()) {
            for (auto& s : issues) s = "joining agent " + to_string(id) + ": " + s;
            throw ValidationError(std::move(issues));
        }
        Topology next = network_.topology().with_agent(id, e->edges);
        require_connected(next);
        network_.set_topology(std::move(next));
        AgentState joined = e->agent;
        joined.power_prev = joined.power;
        agents_.emplace(id, joined);
        multipliers_.emplace(id, BalanceMultiplier{});
        rate_flags_.emplace(id, false);
        spdlog::info("k={} agent {} joined", k_, id.value);
        membership_changed();
        return;
    }
    const auto& leave = std::get<Leave>(event.action);
    for (AgentId id : leave.agents) {
        if (!agents_.contains(id)) throw UnknownAgentError("unknown agent " + to_string(id));
    }
    Topology next = network_.topology().without_agents(leave.agents);
    if (next.empty()) throw EmptyTopologyError("every agent left");
    if (!is_connected(next)) throw DisconnectedError("leave would disconnect the communication graph");
    bool generator_left = false;
    for (AgentId id : leave.agents) {
        if (agents_.contains(id)) generator_left = generator_left || agents_.at(id).is_generator();
    }
    std::size_t generators = 0;
    for (const auto& [id, a] : agents_) {
        if (a.is_generator() && std::find(leave.agents.begin(), leave.agents.end(), id) == leave.agents.end()) {
            ++generators;
        }
    }
    if (generator_left && generators == 0) throw ZeroGeneratorError("leave removes every generator");
    network_.set_topology(std::move(next));
    for (AgentId id : leave.agents) {
        agents_.erase(id);
        multipliers_.erase(id);
        rate_flags_.erase(id);
    }
    spdlog::info("k={} {} agent(s) left", k_, leave.agents.size());
    membership_changed();
}

std::vector<IterationRecord> run_scenario(const Scenario& scenario, const RunOptions& options,
                                          std::optional<Engine>& engine_out) {
    std::vector<IterationRecord> records;
    try {
        Topology topology = [&] {
            std::set<AgentId> nodes;
            for (const auto& a : scenario.agents) nodes.insert(a.id);
            return Topology(nodes, scenario.edges);
        }();
        engine_out.emplace(std::move(topology), scenario.agents,
                           EngineOptions{scenario.alpha0, scenario.fixed_price});
        Engine& engine = *engine_out;
        if (options.observer) engine.set_message_observer(options.observer);
        engine.run_mdst_phase();

        std::vector<ScenarioEvent> events = scenario.events;
        std::stable_sort(events.begin(), events.end(), [](const auto& x, const auto& y) {
            return x.at_iteration < y.at_iteration;
        });
        std::size_t next_event = 0;
        std::uint64_t quiet = 0;
        constexpr std::uint64_t kQuietIterations = 50;
        for (std::uint64_t k = 0; k < scenario.max_iterations; ++k) {
            while (next_event < events.size() && events[next_event].at_iteration == k) {
                engine.apply_event(events[next_event++]);
                quiet = 0;
            }
            records.push_back(engine.run_iteration());
            if (scenario.epsilon > 0) {
                quiet = engine.last_max_delta() < scenario.epsilon ? quiet + 1 : 0;
                if (quiet >= kQuietIterations && next_event == events.size()) {
                    spdlog::info("converged at k={}", k);
                    break;
                }
            }
        }
    } catch (const ValidationError&) {
        if (records.empty()) throw;
        throw RunAborted("run aborted after " + std::to_string(records.size()) + " iterations",
                         std::move(records));
    } catch (const Error& e) {
        throw RunAborted(e.what(), std::move(records));
    }
    return records;
}

std::vector<IterationRecord> run_scenario(const Scenario& scenario, const RunOptions& options) {
    std::optional<Engine> engine;
    return run_scenario(scenario, options, engine);
}

}  // namespace transactive

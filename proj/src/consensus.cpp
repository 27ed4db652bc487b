#include "transactive/consensus.hpp"

#include "transactive/errors.hpp"

namespace transactive {

SumSweepState::SumSweepState(std::vector<double> initial, std::size_t degree, HopCount horizon)
    : prev_(initial), curr_(std::move(initial)), horizon_(horizon),
      degree_(static_cast<double>(degree)) {}

void SumSweepState::advance(const std::vector<double>& neighbor_sum) {
    if (done()) throw ProtocolError("sweep advanced past its horizon");
    if (neighbor_sum.size() != curr_.size()) throw ProtocolError("sweep vector width mismatch");
    std::vector<double> next(curr_.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = q_ == 0 ? curr_[i] + neighbor_sum[i]
                          : neighbor_sum[i] + (1.0 - degree_) * prev_[i];
    }
    prev_ = std::move(curr_);
    curr_ = std::move(next);
    ++q_;
}

AggregateVector init_aggregate(const AgentState& agent) {
    if (agent.is_generator()) {
        return {0.0, agent.power, agent.power * agent.generator().cost, 1, 0};
    }
    return {agent.power + agent.consumer().base_load, 0.0, 0.0, 0, 1};
}

namespace {

template <typename Map>
void require_same_agents(const TreeOverlay& tree, const Map& values) {
    if (values.size() != tree.size()) {
        throw OverlayMismatchError("sweep input covers " + std::to_string(values.size()) +
                                   " agents but the tree has " + std::to_string(tree.size()));
    }
    for (const auto& [a, v] : values) {
        if (!tree.parent.contains(a)) throw OverlayMismatchError("agent " + to_string(a) + " not in tree");
    }
}

Network tree_network(const TreeOverlay& tree) {
    std::set<AgentId> nodes;
    for (const auto& [a, p] : tree.parent) nodes.insert(a);
    Network net(Topology(nodes, tree.edges()));
    net.set_tree(tree);
    return net;
}

}  // namespace

std::map<AgentId, std::vector<double>> run_sweep(Network& network, const TreeOverlay& tree,
                                                 const std::map<AgentId, std::vector<double>>& initial) {
    require_same_agents(tree, initial);
    std::map<AgentId, SumSweepState> states;
    for (const auto& [a, v] : initial) {
        states.emplace(a, SumSweepState(v, tree.degree(a), tree.tree_diameter));
    }
    for (HopCount q = 0; q < tree.tree_diameter; ++q) {
        for (const auto& [a, s] : states) {
            for (AgentId b : tree.tree_neighbors.at(a)) {
                network.send(a, b, SweepValue{s.current()}, Channel::Tree);
            }
        }
        network.deliver();
        for (auto& [a, s] : states) {
            std::vector<double> acc(s.current().size(), 0.0);
            // Inbox order is by sender id, so the accumulation order is fixed.
            for (const auto& m : network.take(a)) {
                const auto* sv = std::get_if<SweepValue>(&m.payload);
                if (!sv) throw ProtocolError("unexpected payload during a sweep");
                if (sv->values.size() != acc.size()) throw ProtocolError("sweep vector width mismatch");
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sv->values[i];
            }
            s.advance(acc);
        }
        network.end_round();
    }
    std::map<AgentId, std::vector<double>> out;
    for (const auto& [a, s] : states) out.emplace(a, s.current());
    return out;
}

std::map<AgentId, double> finite_time_sum(const TreeOverlay& tree,
                                          const std::map<AgentId, double>& initial) {
    require_same_agents(tree, initial);
    Network net = tree_network(tree);
    std::map<AgentId, std::vector<double>> vec;
    for (const auto& [a, x] : initial) vec.emplace(a, std::vector<double>{x});
    std::map<AgentId, double> out;
    for (const auto& [a, v] : run_sweep(net, tree, vec)) out.emplace(a, v[0]);
    return out;
}

std::map<AgentId, AggregateVector> gather_globals(Network& network, const TreeOverlay& tree,
                                                  const std::map<AgentId, AgentState>& agents) {
    std::map<AgentId, std::vector<double>> initial;
    for (const auto& [a, s] : agents) initial.emplace(a, init_aggregate(s).to_vector());
    std::map<AgentId, AggregateVector> out;
    for (const auto& [a, v] : run_sweep(network, tree, initial)) {
        out.emplace(a, AggregateVector::from_vector(v));
    }
    return out;
}

std::map<AgentId, AggregateVector> gather_globals(const TreeOverlay& tree,
                                                  const std::map<AgentId, AgentState>& agents) {
    require_same_agents(tree, agents);
    Network net = tree_network(tree);
    return gather_globals(net, tree, agents);
}

std::map<AgentId, double> power_sum_sweep(Network& network, const TreeOverlay& tree,
                                          const std::map<AgentId, double>& signed_powers) {
    std::map<AgentId, std::vector<double>> vec;
    for (const auto& [a, x] : signed_powers) vec.emplace(a, std::vector<double>{x});
    std::map<AgentId, double> out;
    for (const auto& [a, v] : run_sweep(network, tree, vec)) out.emplace(a, v[0]);
    return out;
}

std::map<AgentId, double> power_sum_sweep(const TreeOverlay& tree,
                                          const std::map<AgentId, double>& signed_powers) {
    return finite_time_sum(tree, signed_powers);
}

}  // namespace transactive

#include "transactive/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <ostream>
#include <random>

#include "transactive/errors.hpp"

namespace transactive {

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error([&] {
          std::string msg = "validation failed";
          for (const auto& issue : issues) msg += "\n  - " + issue;
          return msg;
      }()),
      issues_(std::move(issues)) {}

std::ostream& operator<<(std::ostream& os, AgentId id) { return os << id.value; }

std::string to_string(AgentId id) { return std::to_string(id.value); }

Topology::Topology(const std::set<AgentId>& nodes, const std::vector<Edge>& edges)
    : nodes_(nodes) {
    for (AgentId a : nodes_) {
        if (a.value == 0) throw Error("agent id 0 is not a positive integer");
        adjacency_[a];
    }
    for (const auto& [a, b] : edges) {
        if (a == b) throw Error("self-loop on agent " + to_string(a));
        if (!nodes_.contains(a) || !nodes_.contains(b)) {
            throw UnknownAgentError("edge (" + to_string(a) + ", " + to_string(b) +
                                    ") references an unknown agent");
        }
        adjacency_[a].insert(b);
        adjacency_[b].insert(a);
    }
}

bool Topology::has_edge(AgentId a, AgentId b) const {
    auto it = adjacency_.find(a);
    return it != adjacency_.end() && it->second.contains(b);
}

std::vector<Edge> Topology::edges() const {
    std::vector<Edge> out;
    for (const auto& [a, nbrs] : adjacency_) {
        for (AgentId b : nbrs) {
            if (a < b) out.emplace_back(a, b);
        }
    }
    return out;
}

std::size_t Topology::edge_count() const {
    std::size_t twice = 0;
    for (const auto& [a, nbrs] : adjacency_) twice += nbrs.size();
    return twice / 2;
}

const std::set<AgentId>& Topology::neighbors(AgentId a) const {
    auto it = adjacency_.find(a);
    if (it == adjacency_.end()) throw UnknownAgentError("unknown agent " + to_string(a));
    return it->second;
}

Topology Topology::with_agent(AgentId a, const std::vector<Edge>& new_edges) const {
    if (nodes_.contains(a)) throw Error("agent " + to_string(a) + " already present");
    auto nodes = nodes_;
    nodes.insert(a);
    auto all = edges();
    all.insert(all.end(), new_edges.begin(), new_edges.end());
    return Topology(nodes, all);
}

Topology Topology::without_agents(const std::vector<AgentId>& removed) const {
    auto nodes = nodes_;
    for (AgentId a : removed) {
        if (!nodes.erase(a)) throw UnknownAgentError("unknown agent " + to_string(a));
    }
    std::vector<Edge> kept;
    for (const auto& e : edges()) {
        if (nodes.contains(e.first) && nodes.contains(e.second)) kept.push_back(e);
    }
    return Topology(nodes, kept);
}

const std::set<AgentId>& neighbors(const Topology& topology, AgentId a) {
    return topology.neighbors(a);
}

std::map<AgentId, HopCount> bfs_distances(const Topology& topology, AgentId source) {
    if (!topology.contains(source)) {
        throw UnknownAgentError("unknown agent " + to_string(source));
    }
    std::map<AgentId, HopCount> dist{{source, 0}};
    std::deque<AgentId> frontier{source};
    while (!frontier.empty()) {
        AgentId a = frontier.front();
        frontier.pop_front();
        // std::set iterates in ascending id order.
        for (AgentId b : topology.neighbors(a)) {
            if (dist.try_emplace(b, dist[a] + 1).second) frontier.push_back(b);
        }
    }
    return dist;
}

bool is_connected(const Topology& topology) {
    if (topology.empty()) throw EmptyTopologyError("topology has no nodes");
    return bfs_distances(topology, *topology.nodes().begin()).size() == topology.size();
}

void require_connected(const Topology& topology) {
    if (!is_connected(topology)) throw DisconnectedError("communication graph is disconnected");
}

HopCount eccentricity(const Topology& topology, AgentId a) {
    auto dist = bfs_distances(topology, a);
    if (dist.size() != topology.size()) {
        throw DisconnectedError("communication graph is disconnected");
    }
    HopCount ecc = 0;
    for (const auto& [b, d] : dist) ecc = std::max(ecc, d);
    return ecc;
}

HopCount diameter(const Topology& topology) {
    require_connected(topology);
    HopCount d = 0;
    for (AgentId a : topology.nodes()) d = std::max(d, eccentricity(topology, a));
    return d;
}

HopCount radius(const Topology& topology) {
    require_connected(topology);
    HopCount r = std::numeric_limits<HopCount>::max();
    for (AgentId a : topology.nodes()) r = std::min(r, eccentricity(topology, a));
    return r;
}

namespace {

// Unbiased draw in [0, bound) by rejection.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Topology random_connected_topology(const std::vector<AgentId>& ids,
                                   double extra_edge_probability, std::uint64_t seed) {
    if (ids.empty()) throw EmptyTopologyError("topology has no nodes");
    std::mt19937_64 rng(seed);
    std::vector<AgentId> order(ids);
    std::sort(order.begin(), order.end());
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[bounded(rng, i)]);
    }
    std::set<Edge> edges;
    auto add = [&](AgentId a, AgentId b) { edges.insert(a < b ? Edge{a, b} : Edge{b, a}); };
    for (std::size_t i = 1; i < order.size(); ++i) add(order[i], order[bounded(rng, i)]);

    std::vector<AgentId> sorted(order);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (unit(rng) < extra_edge_probability) add(sorted[i], sorted[j]);
        }
    }
    return Topology(std::set<AgentId>(ids.begin(), ids.end()),
                    std::vector<Edge>(edges.begin(), edges.end()));
}

}  // namespace transactive

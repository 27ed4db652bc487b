#pragma once

#include <map>
#include <set>
#include <vector>

#include "transactive/graph.hpp"
#include "transactive/network.hpp"

namespace transactive {

struct Route {
    HopCount distance = 0;
    AgentId next_hop;

    friend bool operator==(const Route&, const Route&) = default;
};

/// One agent's view of shortest paths: destination -> (distance, next hop).
using DistanceTable = std::map<AgentId, Route>;

/// Spanning tree used by every consensus sweep.
struct TreeOverlay {
    AgentId root;
    std::map<AgentId, AgentId> parent;  // root maps to itself
    std::map<AgentId, std::set<AgentId>> tree_neighbors;
    HopCount tree_diameter = 0;

    std::size_t size() const noexcept { return parent.size(); }
    std::size_t degree(AgentId a) const;
    std::vector<Edge> edges() const;

    friend bool operator==(const TreeOverlay&, const TreeOverlay&) = default;
};

/// Per-agent state of the distance-vector flood.
///
/// Every round the agent announces the destinations it learned in the previous
/// round. A destination heard from several neighbors in the same round keeps
/// the lowest-id neighbor as next hop. A round that teaches nothing new means
/// the table is complete, since hop layers of a connected graph are contiguous.
class ApspNode {
public:
    explicit ApspNode(AgentId self);

    AgentId self() const noexcept { return self_; }
    const DistanceTable& table() const noexcept { return table_; }
    bool complete() const noexcept { return complete_; }
    HopCount eccentricity() const noexcept { return eccentricity_; }

    std::vector<DistanceAnnounce> announcements() const;
    void receive(const std::vector<std::pair<AgentId, DistanceAnnounce>>& inbox);

private:
    AgentId self_;
    DistanceTable table_;
    std::vector<AgentId> fresh_;
    bool complete_ = false;
    HopCount eccentricity_ = 0;
    HopCount rounds_ = 0;
};

std::map<AgentId, DistanceTable> distributed_apsp(const Topology& topology);

/// Minimum eccentricity (largest table entry), lowest id on ties.
AgentId elect_center(const std::map<AgentId, DistanceTable>& tables);

TreeOverlay build_tree(const Topology& topology, const std::map<AgentId, DistanceTable>& tables,
                       AgentId center);

/// Longest path in a tree given as adjacency sets (two BFS passes).
HopCount tree_diameter(const std::map<AgentId, std::set<AgentId>>& adjacency);

struct MdstStats {
    std::uint64_t apsp_rounds = 0;
    std::uint64_t total_rounds = 0;
};

/// Full construction over `network`: distance-vector flood with eccentricity
/// piggyback, local center election at every agent, then one round of parent
/// announcements. Throws DisconnectedError if some destination is never learned.
TreeOverlay run_mdst_protocol(Network& network, MdstStats* stats = nullptr);

}  // namespace transactive

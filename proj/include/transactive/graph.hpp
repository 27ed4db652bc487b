#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace transactive {

/// Positive integer identifier of an agent. Ordering is total and is used for
/// every tie-break in the library.
struct AgentId {
    std::uint32_t value = 0;

    constexpr AgentId() = default;
    constexpr explicit AgentId(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(AgentId, AgentId) = default;
};

std::ostream& operator<<(std::ostream& os, AgentId id);
std::string to_string(AgentId id);

using Edge = std::pair<AgentId, AgentId>;
using HopCount = std::uint32_t;

/// Undirected, unweighted communication graph stored as adjacency sets.
///
/// Construction rejects self-loops and edges with unknown endpoints. It does
/// not require connectivity, so that is_connected() has something to answer;
/// callers that need a connected graph use require_connected().
class Topology {
public:
    Topology() = default;
    Topology(const std::set<AgentId>& nodes, const std::vector<Edge>& edges);

    const std::set<AgentId>& nodes() const noexcept { return nodes_; }
    bool contains(AgentId a) const { return nodes_.contains(a); }
    bool has_edge(AgentId a, AgentId b) const;
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    /// Edges with first < second, in ascending order.
    std::vector<Edge> edges() const;
    std::size_t edge_count() const;

    const std::set<AgentId>& neighbors(AgentId a) const;

    /// Copies with membership changes applied; the receiver is unchanged.
    Topology with_agent(AgentId a, const std::vector<Edge>& new_edges) const;
    Topology without_agents(const std::vector<AgentId>& removed) const;

    friend bool operator==(const Topology&, const Topology&) = default;

private:
    std::set<AgentId> nodes_;
    std::map<AgentId, std::set<AgentId>> adjacency_;
};

const std::set<AgentId>& neighbors(const Topology& topology, AgentId a);

bool is_connected(const Topology& topology);

/// Throws DisconnectedError (or EmptyTopologyError) unless the graph is connected.
void require_connected(const Topology& topology);

/// Hop counts from `source`. Only reachable nodes appear in the result.
std::map<AgentId, HopCount> bfs_distances(const Topology& topology, AgentId source);

HopCount eccentricity(const Topology& topology, AgentId a);
HopCount diameter(const Topology& topology);
HopCount radius(const Topology& topology);

/// Connected graph over `ids`: a random spanning tree plus each remaining pair
/// with probability `extra_edge_probability`. Uses mt19937_64 with an explicit
/// bounded draw so the result does not depend on the standard library.
Topology random_connected_topology(const std::vector<AgentId>& ids,
                                   double extra_edge_probability,
                                   std::uint64_t seed);

}  // namespace transactive

#include "transactive/mdst.hpp"

#include <algorithm>
#include <deque>

#include "transactive/errors.hpp"

namespace transactive {

std::size_t TreeOverlay::degree(AgentId a) const {
    auto it = tree_neighbors.find(a);
    if (it == tree_neighbors.end()) throw UnknownAgentError("agent " + to_string(a) + " not in tree");
    return it->second.size();
}

std::vector<Edge> TreeOverlay::edges() const {
    std::vector<Edge> out;
    for (const auto& [a, p] : parent) {
        if (a != p) out.push_back(a < p ? Edge{a, p} : Edge{p, a});
    }
    std::sort(out.begin(), out.end());
    return out;
}

ApspNode::ApspNode(AgentId self) : self_(self) {
    table_.emplace(self, Route{0, self});
    fresh_.push_back(self);
}

std::vector<DistanceAnnounce> ApspNode::announcements() const {
    std::vector<DistanceAnnounce> out;
    out.reserve(fresh_.size());
    for (AgentId dest : fresh_) out.push_back({dest, table_.at(dest).distance});
    return out;
}

void ApspNode::receive(const std::vector<std::pair<AgentId, DistanceAnnounce>>& inbox) {
    if (complete_) return;
    DistanceTable learned;
    for (const auto& [sender, ann] : inbox) {
        if (table_.contains(ann.destination)) continue;
        Route candidate{ann.distance + 1, sender};
        auto [it, inserted] = learned.try_emplace(ann.destination, candidate);
        if (!inserted) {
            Route& cur = it->second;
            if (candidate.distance < cur.distance ||
                (candidate.distance == cur.distance && candidate.next_hop < cur.next_hop)) {
                cur = candidate;
            }
        }
    }
    fresh_.clear();
    for (const auto& [dest, route] : learned) {
        table_.emplace(dest, route);
        fresh_.push_back(dest);
    }
    if (learned.empty()) {
        complete_ = true;
        for (const auto& [dest, route] : table_) eccentricity_ = std::max(eccentricity_, route.distance);
    }
    ++rounds_;
}

namespace {

std::vector<std::pair<AgentId, DistanceAnnounce>> distance_inbox(const std::vector<Message>& msgs) {
    std::vector<std::pair<AgentId, DistanceAnnounce>> out;
    for (const auto& m : msgs) {
        if (const auto* d = std::get_if<DistanceAnnounce>(&m.payload)) out.emplace_back(m.sender, *d);
    }
    return out;
}

void require_complete(const std::map<AgentId, DistanceTable>& tables) {
    for (const auto& [a, table] : tables) {
        if (table.size() != tables.size()) {
            throw IncompleteTableError("distance table of agent " + to_string(a) + " has " +
                                       std::to_string(table.size()) + " of " +
                                       std::to_string(tables.size()) + " entries");
        }
    }
}

HopCount table_eccentricity(const DistanceTable& table) {
    HopCount ecc = 0;
    for (const auto& [dest, route] : table) ecc = std::max(ecc, route.distance);
    return ecc;
}

// Farthest node from `start` and its distance; ties go to the lowest id.
std::pair<AgentId, HopCount> farthest(const std::map<AgentId, std::set<AgentId>>& adjacency,
                                      AgentId start) {
    std::map<AgentId, HopCount> dist{{start, 0}};
    std::deque<AgentId> frontier{start};
    std::pair<AgentId, HopCount> best{start, 0};
    while (!frontier.empty()) {
        AgentId a = frontier.front();
        frontier.pop_front();
        HopCount d = dist[a];
        if (d > best.second) best = {a, d};
        for (AgentId b : adjacency.at(a)) {
            if (dist.try_emplace(b, d + 1).second) frontier.push_back(b);
        }
    }
    return best;
}

}  // namespace

std::map<AgentId, DistanceTable> distributed_apsp(const Topology& topology) {
    if (topology.empty()) throw EmptyTopologyError("topology has no nodes");
    Network net(topology);
    std::map<AgentId, ApspNode> nodes;
    for (AgentId a : topology.nodes()) nodes.emplace(a, ApspNode(a));

    const std::size_t limit = topology.size() + 1;
    for (std::size_t round = 0;; ++round) {
        bool all_complete = true;
        for (auto& [a, node] : nodes) all_complete = all_complete && node.complete();
        if (all_complete) break;
        if (round > limit) throw ProtocolError("distance-vector flood did not settle");
        for (auto& [a, node] : nodes) {
            if (node.complete()) continue;
            for (const auto& ann : node.announcements()) {
                for (AgentId b : topology.neighbors(a)) net.send(a, b, ann, Channel::Topology);
            }
        }
        net.deliver();
        for (auto& [a, node] : nodes) node.receive(distance_inbox(net.take(a)));
        net.end_round();
    }

    std::map<AgentId, DistanceTable> tables;
    for (const auto& [a, node] : nodes) {
        if (node.table().size() != topology.size()) {
            throw DisconnectedError("agent " + to_string(a) + " never learned every destination");
        }
        tables.emplace(a, node.table());
    }
    return tables;
}

AgentId elect_center(const std::map<AgentId, DistanceTable>& tables) {
    if (tables.empty()) throw EmptyTopologyError("no distance tables");
    require_complete(tables);
    AgentId best = tables.begin()->first;
    HopCount best_ecc = table_eccentricity(tables.begin()->second);
    for (const auto& [a, table] : tables) {
        HopCount ecc = table_eccentricity(table);
        if (ecc < best_ecc) {
            best = a;
            best_ecc = ecc;
        }
    }
    return best;
}

HopCount tree_diameter(const std::map<AgentId, std::set<AgentId>>& adjacency) {
    if (adjacency.empty()) return 0;
    auto [end, unused] = farthest(adjacency, adjacency.begin()->first);
    return farthest(adjacency, end).second;
}

TreeOverlay build_tree(const Topology& topology, const std::map<AgentId, DistanceTable>& tables,
                       AgentId center) {
    require_complete(tables);
    if (tables.size() != topology.size()) {
        throw IncompleteTableError("tables cover " + std::to_string(tables.size()) + " of " +
                                   std::to_string(topology.size()) + " agents");
    }
    if (!tables.contains(center)) throw UnknownAgentError("center " + to_string(center) + " has no table");

    TreeOverlay tree;
    tree.root = center;
    for (AgentId a : topology.nodes()) {
        const auto& table = tables.at(a);
        auto route = table.find(center);
        if (route == table.end()) throw IncompleteTableError("agent " + to_string(a) + " has no route to center");
        AgentId p = a == center ? a : route->second.next_hop;
        if (a != center && !topology.has_edge(a, p)) {
            throw CycleError("next hop " + to_string(p) + " of agent " + to_string(a) +
                             " is not a neighbor");
        }
        tree.parent.emplace(a, p);
        tree.tree_neighbors[a];
    }

    // Every parent chain must reach the root within |nodes| steps.
    for (const auto& [a, p] : tree.parent) {
        AgentId cur = a;
        for (std::size_t steps = 0; cur != center; ++steps) {
            if (steps > tree.parent.size()) throw CycleError("parent chain from " + to_string(a) + " loops");
            cur = tree.parent.at(cur);
        }
        if (a != p) {
            tree.tree_neighbors[a].insert(p);
            tree.tree_neighbors[p].insert(a);
        }
    }
    tree.tree_diameter = tree_diameter(tree.tree_neighbors);
    return tree;
}

TreeOverlay run_mdst_protocol(Network& network, MdstStats* stats) {
    const Topology& topology = network.topology();
    if (topology.empty()) throw EmptyTopologyError("topology has no nodes");

    struct Local {
        ApspNode apsp;
        std::map<AgentId, HopCount> eccentricities;
        std::vector<EccentricityAnnounce> to_relay;
        bool announced_own = false;
        bool parent_sent = false;
        AgentId parent;
        std::set<AgentId> children;

        bool elected() const { return apsp.complete() && eccentricities.size() == apsp.table().size(); }
    };
    std::map<AgentId, Local> agents;
    for (AgentId a : topology.nodes()) agents.emplace(a, Local{ApspNode(a), {}, {}, false, false, a, {}});

    auto center_of = [](const Local& l) {
        AgentId best = l.eccentricities.begin()->first;
        HopCount best_ecc = l.eccentricities.begin()->second;
        for (const auto& [a, e] : l.eccentricities) {
            if (e < best_ecc) {
                best = a;
                best_ecc = e;
            }
        }
        return best;
    };

    const std::uint64_t start = network.round();
    std::uint64_t apsp_done_round = start;
    const std::size_t limit = 3 * topology.size() + 3;
    for (std::size_t round = 0;; ++round) {
        bool finished = true;
        for (const auto& [a, l] : agents) finished = finished && l.parent_sent;
        if (finished) break;
        if (round > limit) {
            throw DisconnectedError("tree construction did not finish; graph is likely disconnected");
        }

        for (auto& [a, l] : agents) {
            const auto& nbrs = topology.neighbors(a);
            if (!l.apsp.complete()) {
                for (const auto& ann : l.apsp.announcements()) {
                    for (AgentId b : nbrs) network.send(a, b, ann, Channel::Topology);
                }
            }
            for (const auto& ecc : l.to_relay) {
                for (AgentId b : nbrs) network.send(a, b, ecc, Channel::Topology);
            }
            l.to_relay.clear();
            if (l.elected() && !l.parent_sent) {
                AgentId center = center_of(l);
                l.parent = a == center ? a : l.apsp.table().at(center).next_hop;
                if (l.parent != a) network.send(a, l.parent, ParentAnnounce{l.parent}, Channel::Topology);
                l.parent_sent = true;
            }
        }
        network.deliver();
        for (auto& [a, l] : agents) {
            auto inbox = network.take(a);
            const bool was_complete = l.apsp.complete();
            l.apsp.receive(distance_inbox(inbox));
            for (const auto& m : inbox) {
                if (const auto* e = std::get_if<EccentricityAnnounce>(&m.payload)) {
                    if (l.eccentricities.emplace(e->agent, e->value).second) l.to_relay.push_back(*e);
                } else if (const auto* p = std::get_if<ParentAnnounce>(&m.payload)) {
                    if (p->parent != a) throw ProtocolError("parent announcement delivered to the wrong agent");
                    l.children.insert(m.sender);
                }
            }
            if (!was_complete && l.apsp.complete() && !l.announced_own) {
                EccentricityAnnounce own{a, l.apsp.eccentricity()};
                l.eccentricities.emplace(a, own.value);
                l.to_relay.push_back(own);
                l.announced_own = true;
            }
        }
        network.end_round();
        bool all_tables = true;
        for (const auto& [a, l] : agents) all_tables = all_tables && l.apsp.complete();
        if (all_tables && apsp_done_round == start) apsp_done_round = network.round();
    }

    std::map<AgentId, DistanceTable> tables;
    for (const auto& [a, l] : agents) {
        if (l.apsp.table().size() != topology.size()) {
            throw DisconnectedError("agent " + to_string(a) + " never learned every destination");
        }
        tables.emplace(a, l.apsp.table());
    }
    const AgentId center = center_of(agents.begin()->second);
    TreeOverlay tree = build_tree(topology, tables, center);

    // The agents' local views must agree with the assembled tree.
    for (const auto& [a, l] : agents) {
        if (center_of(l) != center) throw ProtocolError("agents elected different centers");
        std::set<AgentId> local = l.children;
        if (l.parent != a) local.insert(l.parent);
        if (local != tree.tree_neighbors.at(a)) {
            throw ProtocolError("local tree view of agent " + to_string(a) + " disagrees with the overlay");
        }
    }
    network.set_tree(tree);

    if (stats) {
        stats->apsp_rounds = apsp_done_round - start;
        stats->total_rounds = network.round() - start;
    }
    return tree;
}

}  // namespace transactive

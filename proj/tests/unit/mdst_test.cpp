#include <gtest/gtest.h>

#include <random>

#include "../support/builders.hpp"
#include "transactive/errors.hpp"
#include "transactive/mdst.hpp"

using namespace transactive;
using namespace testing_support;

TEST(DistributedApsp, PathTable) {
    auto tables = distributed_apsp(path(3));
    DistanceTable expected{{id(1), {0, id(1)}}, {id(2), {1, id(2)}}, {id(3), {2, id(2)}}};
    EXPECT_EQ(tables.at(id(1)), expected);
}

TEST(DistributedApsp, Singleton) {
    auto tables = distributed_apsp(Topology(ids(1, 1), {}));
    EXPECT_EQ(tables.at(id(1)), (DistanceTable{{id(1), {0, id(1)}}}));
}

TEST(DistributedApsp, CycleTieGoesToLowestNextHop) {
    auto tables = distributed_apsp(cycle(4));
    EXPECT_EQ(tables.at(id(1)).at(id(3)), (Route{2, id(2)}));
}

TEST(DistributedApsp, DisconnectedThrows) {
    EXPECT_THROW(distributed_apsp(make(4, {{1, 2}, {3, 4}})), DisconnectedError);
}

TEST(DistributedApsp, TablesMatchFloydAndUseNeighbors) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const Topology t = random_graph(static_cast<std::uint32_t>(1 + rng() % 15), 0.2, rng);
        const auto ref = floyd(t);
        const auto tables = distributed_apsp(t);
        for (const auto& [a, table] : tables) {
            ASSERT_EQ(table.size(), t.size());
            EXPECT_EQ(table.at(a), (Route{0, a}));
            for (const auto& [dest, route] : table) {
                ASSERT_EQ(route.distance, ref.at(a).at(dest));
                if (dest != a) {
                    ASSERT_TRUE(t.has_edge(a, route.next_hop));
                    // The next hop is one step closer, and no lower-id neighbor is.
                    ASSERT_EQ(ref.at(route.next_hop).at(dest) + 1, route.distance);
                    for (AgentId b : t.neighbors(a)) {
                        if (b < route.next_hop) {
                            ASSERT_NE(ref.at(b).at(dest) + 1, route.distance);
                        }
                    }
                }
            }
        }
    }
}

TEST(ElectCenter, Examples) {
    EXPECT_EQ(elect_center(distributed_apsp(path(3))), id(2));
    EXPECT_EQ(elect_center(distributed_apsp(cycle(4))), id(1));
    EXPECT_EQ(elect_center(distributed_apsp(star(5, {1, 2, 3, 4}))), id(5));
}

TEST(ElectCenter, IncompleteTablesThrow) {
    auto tables = distributed_apsp(path(3));
    tables.at(id(1)).erase(id(3));
    EXPECT_THROW(elect_center(tables), IncompleteTableError);
}

TEST(BuildTree, Path) {
    const auto t = path(3);
    const auto tree = build_tree(t, distributed_apsp(t), id(2));
    EXPECT_EQ(tree.parent, (std::map<AgentId, AgentId>{{id(1), id(2)}, {id(2), id(2)}, {id(3), id(2)}}));
    EXPECT_EQ(tree.tree_diameter, 2u);
}

TEST(BuildTree, Cycle) {
    const auto t = cycle(4);
    const auto tree = build_tree(t, distributed_apsp(t), id(1));
    EXPECT_EQ(tree.edges(), (std::vector<Edge>{{id(1), id(2)}, {id(1), id(4)}, {id(2), id(3)}}));
    EXPECT_EQ(tree.tree_diameter, 3u);
}

TEST(BuildTree, Star) {
    const auto t = star(5, {1, 2, 3, 4});
    const auto tree = build_tree(t, distributed_apsp(t), id(5));
    EXPECT_EQ(tree.edges().size(), 4u);
    for (auto [a, b] : tree.edges()) EXPECT_TRUE(a == id(5) || b == id(5));
    EXPECT_EQ(tree.tree_diameter, 2u);
}

TEST(BuildTree, CorruptedTablesAreDetected) {
    const auto t = cycle(4);
    auto tables = distributed_apsp(t);
    // 2 routes to 1 via 3 and 3 routes via 2: a loop.
    tables.at(id(2)).at(id(1)).next_hop = id(3);
    tables.at(id(3)).at(id(1)).next_hop = id(2);
    EXPECT_THROW(build_tree(t, tables, id(1)), CycleError);
    tables = distributed_apsp(t);
    tables.at(id(3)).at(id(1)).next_hop = id(1);  // not a neighbor of 3
    EXPECT_THROW(build_tree(t, tables, id(1)), CycleError);
}

TEST(TreeDiameter, DoubleSweep) {
    std::map<AgentId, std::set<AgentId>> adj{{id(1), {id(2)}}, {id(2), {id(1), id(3)}}, {id(3), {id(2)}}};
    EXPECT_EQ(tree_diameter(adj), 2u);
    EXPECT_EQ(tree_diameter({{id(4), {}}}), 0u);
}

TEST(MdstProtocol, MatchesCentralConstructionAndInvariants) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 150; ++trial) {
        const Topology t = random_graph(static_cast<std::uint32_t>(1 + rng() % 18), 0.2, rng);
        Network net(t);
        MdstStats stats;
        const TreeOverlay tree = run_mdst_protocol(net, &stats);

        const auto tables = distributed_apsp(t);
        ASSERT_EQ(tree, build_tree(t, tables, elect_center(tables)));
        EXPECT_LE(stats.apsp_rounds, t.size() + 1);

        // Spanning tree over topology edges.
        ASSERT_EQ(tree.edges().size() + 1, t.size());
        for (auto [a, b] : tree.edges()) ASSERT_TRUE(t.has_edge(a, b));
        std::set<AgentId> tree_nodes;
        for (auto& [a, p] : tree.parent) tree_nodes.insert(a);
        ASSERT_EQ(tree_nodes, t.nodes());
        const Topology as_graph(t.nodes(), tree.edges());
        ASSERT_TRUE(is_connected(as_graph));

        // Root distances preserved, diameter bounds.
        const auto d_graph = bfs_distances(t, tree.root);
        const auto d_tree = bfs_distances(as_graph, tree.root);
        EXPECT_EQ(d_graph, d_tree);
        EXPECT_EQ(tree.tree_diameter, diameter(as_graph));
        EXPECT_LE(tree.tree_diameter, 2 * radius(t));
        EXPECT_EQ(eccentricity(t, tree.root), radius(t));

        // tree_neighbors consistent with parents.
        for (auto& [a, nbrs] : tree.tree_neighbors) {
            for (AgentId b : nbrs) ASSERT_TRUE(tree.parent.at(a) == b || tree.parent.at(b) == a);
        }
    }
}

TEST(MdstProtocol, OnlyTopologyLinksAreUsed) {
    std::mt19937_64 rng(23);
    const Topology t = random_graph(12, 0.15, rng);
    Network net(t);
    std::size_t messages = 0;
    net.set_observer([&](const Message& m, Channel c) {
        ++messages;
        EXPECT_EQ(c, Channel::Topology);
        EXPECT_TRUE(t.has_edge(m.sender, m.recipient));
        EXPECT_EQ(m.round, net.round());
    });
    run_mdst_protocol(net);
    EXPECT_GT(messages, 0u);
}

TEST(MdstProtocol, Deterministic) {
    std::mt19937_64 rng(24);
    const Topology t = random_graph(15, 0.2, rng);
    Network a(t), b(t);
    EXPECT_EQ(run_mdst_protocol(a), run_mdst_protocol(b));
}

TEST(MdstProtocol, SingletonAndDisconnected) {
    Network single(Topology(ids(1, 1), {}));
    const auto tree = run_mdst_protocol(single);
    EXPECT_EQ(tree.root, id(1));
    EXPECT_EQ(tree.tree_diameter, 0u);
    Network split(make(4, {{1, 2}, {3, 4}}));
    EXPECT_THROW(run_mdst_protocol(split), DisconnectedError);
}

TEST(MdstQuality, WithinOneHopOfOptimumOnSmallGraphs) {
    for (std::uint32_t n = 1; n <= 5; ++n) {
        for (const auto& t : all_connected_graphs(n)) {
            Network net(t);
            const auto tree = run_mdst_protocol(net);
            ASSERT_LE(tree.tree_diameter, brute_force_min_tree_diameter(t) + 1);
        }
    }
}

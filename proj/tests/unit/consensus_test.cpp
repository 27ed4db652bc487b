#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/builders.hpp"
#include "transactive/consensus.hpp"
#include "transactive/errors.hpp"

using namespace transactive;
using namespace testing_support;

namespace {

TreeOverlay tree_of(const Topology& t) {
    Network net(t);
    return run_mdst_protocol(net);
}

std::map<AgentId, double> values(std::initializer_list<std::pair<std::uint32_t, double>> v) {
    std::map<AgentId, double> out;
    for (auto [a, x] : v) out.emplace(AgentId(a), x);
    return out;
}

}  // namespace

TEST(InitAggregate, Examples) {
    EXPECT_EQ(init_aggregate(make_generator(id(1), {2.0, 0, 1000, -1, 1}, 100)),
              (AggregateVector{0, 100, 200, 1, 0}));
    EXPECT_EQ(init_aggregate(make_consumer(id(2), {1.0, 0, 4000, -1, 1, 0}, 3000)),
              (AggregateVector{3000, 0, 0, 0, 1}));
    EXPECT_EQ(init_aggregate(make_consumer(id(3), {1.0, 0, 4000, -1, 1, 0}, 0)), (AggregateVector{0, 0, 0, 0, 1}));
    // Base load counts as demand.
    EXPECT_EQ(init_aggregate(make_consumer(id(4), {1.0, 0, 4000, -1, 1, 250}, 100)).demand, 350);
}

TEST(FiniteTimeSum, PathHandRun) {
    const auto tree = tree_of(path(3));
    ASSERT_EQ(tree.tree_diameter, 2u);
    EXPECT_EQ(finite_time_sum(tree, values({{1, 1}, {2, 2}, {3, 3}})), values({{1, 6}, {2, 6}, {3, 6}}));
}

TEST(FiniteTimeSum, IntermediateStepsOnPath) {
    // Step 0 gives (3, 6, 5); step 1 gives (6, 6, 6).
    const auto tree = tree_of(path(3));
    std::map<AgentId, SumSweepState> s;
    const std::map<AgentId, double> x0{{id(1), 1}, {id(2), 2}, {id(3), 3}};
    for (auto [a, x] : x0) s.emplace(a, SumSweepState({x}, tree.degree(a), tree.tree_diameter));
    auto step = [&] {
        std::map<AgentId, std::vector<double>> nbr;
        for (auto& [a, st] : s) {
            double acc = 0;
            for (AgentId b : tree.tree_neighbors.at(a)) acc += s.at(b).current()[0];
            nbr[a] = {acc};
        }
        for (auto& [a, st] : s) st.advance(nbr[a]);
    };
    step();
    EXPECT_EQ(s.at(id(1)).current()[0], 3);
    EXPECT_EQ(s.at(id(2)).current()[0], 6);
    EXPECT_EQ(s.at(id(3)).current()[0], 5);
    step();
    for (auto& [a, st] : s) {
        EXPECT_EQ(st.current()[0], 6);
        EXPECT_TRUE(st.done());
        EXPECT_THROW(st.advance({0}), ProtocolError);
    }
}

TEST(FiniteTimeSum, StarHandRun) {
    const auto tree = tree_of(star(1, {2, 3, 4}));
    EXPECT_EQ(finite_time_sum(tree, values({{1, 1}, {2, 2}, {3, 3}, {4, 4}})),
              values({{1, 10}, {2, 10}, {3, 10}, {4, 10}}));
}

TEST(FiniteTimeSum, ZerosAndSingleton) {
    const auto tree = tree_of(cycle(6));
    std::map<AgentId, double> zeros;
    for (auto& [a, nbrs] : tree.tree_neighbors) zeros[a] = 0;
    for (auto& [a, x] : finite_time_sum(tree, zeros)) EXPECT_EQ(x, 0);
    const auto single = tree_of(Topology(ids(1, 1), {}));
    EXPECT_EQ(finite_time_sum(single, values({{1, 7.5}})), values({{1, 7.5}}));
}

TEST(FiniteTimeSum, MismatchThrows) {
    const auto tree = tree_of(path(3));
    EXPECT_THROW(finite_time_sum(tree, values({{1, 1}, {2, 2}})), OverlayMismatchError);
    EXPECT_THROW(finite_time_sum(tree, values({{1, 1}, {2, 2}, {9, 3}})), OverlayMismatchError);
}

TEST(FiniteTimeSum, ExactOnRandomIntegerTrees) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> value(-1000000, 1000000);
    for (int trial = 0; trial < 120; ++trial) {
        const auto n = static_cast<std::uint32_t>(3 + rng() % 48);
        const Topology t = random_tree(n, rng);
        const auto tree = tree_of(t);
        std::map<AgentId, double> x;
        double total = 0;
        for (AgentId a : t.nodes()) {
            x[a] = value(rng);
            total += x[a];
        }
        for (auto& [a, v] : finite_time_sum(tree, x)) ASSERT_EQ(v, total);
    }
}

TEST(FiniteTimeSum, Linearity) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int trial = 0; trial < 30; ++trial) {
        const auto tree = tree_of(random_graph(static_cast<std::uint32_t>(2 + rng() % 20), 0.2, rng));
        std::map<AgentId, double> x, y, mix;
        const double alpha = u(rng), beta = u(rng);
        for (auto& [a, p] : tree.parent) {
            x[a] = u(rng);
            y[a] = u(rng);
            mix[a] = alpha * x[a] + beta * y[a];
        }
        auto sx = finite_time_sum(tree, x), sy = finite_time_sum(tree, y), sm = finite_time_sum(tree, mix);
        for (auto& [a, v] : sm) {
            const double expect = alpha * sx[a] + beta * sy[a];
            EXPECT_NEAR(v, expect, 1e-9 * (std::abs(expect) + 1e4));
        }
    }
}

TEST(FiniteTimeSum, FloatingPointAgreementWithinUlps) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0, 10000);
    for (int trial = 0; trial < 50; ++trial) {
        const auto tree = tree_of(random_graph(static_cast<std::uint32_t>(2 + rng() % 30), 0.1, rng));
        std::map<AgentId, double> x;
        long double exact = 0;
        for (auto& [a, p] : tree.parent) {
            x[a] = u(rng);
            exact += x[a];
        }
        const double ulp = std::nextafter(static_cast<double>(exact), INFINITY) - static_cast<double>(exact);
        for (auto& [a, v] : finite_time_sum(tree, x)) {
            ASSERT_LE(std::abs(v - static_cast<double>(exact)),
                      8.0 * ulp * std::max<double>(tree.tree_diameter, 1) * static_cast<double>(tree.size()));
        }
    }
}

TEST(Sweep, UsesTreeLinksForExactlyDiameterRounds) {
    std::mt19937_64 rng(34);
    const Topology t = random_graph(14, 0.3, rng);
    Network net(t);
    const auto tree = run_mdst_protocol(net);
    const auto start = net.round();
    net.set_observer([&](const Message& m, Channel c) {
        EXPECT_EQ(c, Channel::Tree);
        EXPECT_TRUE(tree.tree_neighbors.at(m.sender).contains(m.recipient));
        EXPECT_TRUE(std::holds_alternative<SweepValue>(m.payload));
    });
    std::map<AgentId, double> x;
    for (AgentId a : t.nodes()) x[a] = 1;
    for (auto& [a, v] : power_sum_sweep(net, tree, x)) EXPECT_EQ(v, 14);
    EXPECT_EQ(net.round() - start, tree.tree_diameter);
}

TEST(Sweep, NonTreeSendIsRejected) {
    const Topology t = cycle(4);
    Network net(t);
    const auto tree = run_mdst_protocol(net);
    // (3,4) is a topology edge but not part of the tree rooted at 1.
    ASSERT_FALSE(tree.tree_neighbors.at(id(3)).contains(id(4)));
    EXPECT_THROW(net.send(id(3), id(4), SweepValue{{1.0}}, Channel::Tree), ProtocolError);
}

TEST(GatherGlobals, TwoNodeExample) {
    const auto tree = tree_of(path(2));
    std::map<AgentId, AgentState> agents{
        {id(1), make_generator(id(1), {1.0, 0, 1000, -1, 1}, 500)},
        {id(2), make_consumer(id(2), {1.0, 0, 1000, -1, 1, 0}, 400)},
    };
    for (auto& [a, agg] : gather_globals(tree, agents)) EXPECT_EQ(agg, (AggregateVector{400, 500, 500, 1, 1}));
}

TEST(GatherGlobals, TenAgentsCountFiveAndFive) {
    std::mt19937_64 rng(35);
    const Topology t = random_graph(10, 0.2, rng);
    std::map<AgentId, AgentState> agents;
    for (AgentId a : t.nodes()) {
        agents.emplace(a, a.value <= 5 ? make_generator(a, {1.0, 100, 4000, -100, 100}, 1000.0 * a.value)
                                       : make_consumer(a, {1.0, 3000, 7500, -100, 100, 0}, 3000.0 + a.value));
    }
    for (auto& [a, agg] : gather_globals(tree_of(t), agents)) {
        EXPECT_EQ(agg.generators, 5u);
        EXPECT_EQ(agg.consumers, 5u);
        EXPECT_EQ(agg.generation, 15000);
    }
}

TEST(GatherGlobals, SingletonReturnsOwnVector) {
    const auto tree = tree_of(Topology(ids(1, 1), {}));
    std::map<AgentId, AgentState> agents{{id(1), make_generator(id(1), {2.0, 0, 1000, -1, 1}, 300)}};
    EXPECT_EQ(gather_globals(tree, agents).at(id(1)), init_aggregate(agents.at(id(1))));
}

TEST(PowerSumSweep, Examples) {
    const auto pair_tree = tree_of(path(2));
    for (auto& [a, v] : power_sum_sweep(pair_tree, values({{1, 400}, {2, -500}}))) EXPECT_EQ(v, -100);
    const auto balanced = tree_of(path(4));
    for (auto& [a, v] : power_sum_sweep(balanced, values({{1, 300}, {2, -200}, {3, 100}, {4, -200}}))) {
        EXPECT_EQ(v, 0);
    }
    const auto single = tree_of(Topology(ids(1, 1), {}));
    EXPECT_EQ(power_sum_sweep(single, values({{1, 400}})).at(id(1)), 400);
}

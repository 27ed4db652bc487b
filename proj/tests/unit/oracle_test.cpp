#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/builders.hpp"
#include "transactive/errors.hpp"
#include "transactive/oracle.hpp"

using namespace transactive;
using namespace testing_support;

namespace {

double total_demand(const std::vector<AgentState>& agents, const std::map<AgentId, double>& p) {
    double d = 0;
    for (const auto& a : agents) {
        if (!a.is_generator()) d += p.at(a.id) + a.base_load();
    }
    return d;
}

double total_generation(const std::vector<AgentState>& agents, const std::map<AgentId, double>& p) {
    double g = 0;
    for (const auto& a : agents) {
        if (a.is_generator()) g += p.at(a.id);
    }
    return g;
}

// Brute force for one generator and up to three consumers: enumerate consumer
// powers on a 1 W grid; the generator covers the total.
std::pair<double, std::map<AgentId, double>> grid_search(const std::vector<AgentState>& agents, double price) {
    std::vector<const AgentState*> consumers;
    const AgentState* generator = nullptr;
    for (const auto& a : agents) {
        if (a.is_generator()) generator = &a; else consumers.push_back(&a);
    }
    double best = -INFINITY;
    std::map<AgentId, double> best_p, p;
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double demand) {
        if (i == consumers.size()) {
            if (demand < generator->p_min() || demand > generator->p_max()) return;
            p[generator->id] = demand;
            const double value = dispatch_objective(agents, p, price);
            if (value > best) best = value, best_p = p;
            return;
        }
        const auto* c = consumers[i];
        for (double x = std::ceil(c->p_min()); x <= c->p_max(); x += 1) {
            p[c->id] = x;
            rec(i + 1, demand + x + c->base_load());
        }
    };
    rec(0, 0);
    return {best, best_p};
}

}  // namespace

TEST(SocialWelfare, Examples) {
    std::vector<AgentState> agents{make_generator(id(1), {1, 0, 100, -1, 1}, 0),
                                   make_consumer(id(2), {1, 0, 100, -1, 1, 0}, 0)};
    EXPECT_EQ(social_welfare(agents, {{id(1), 0}, {id(2), 100}}, 1), 0);
    EXPECT_EQ(social_welfare(agents, {{id(1), 100}, {id(2), 0}}, 1), 0);
    std::vector<AgentState> single{make_consumer(id(3), {1, 0, 4000, -1, 1, 0}, 0)};
    EXPECT_DOUBLE_EQ(social_welfare(single, {{id(3), 2000}}, 1), 1000);
}

TEST(SolveWelfare, SymmetricPair) {
    std::vector<AgentState> agents{make_generator(id(1), {1, 0, 100, -1, 1}, 50),
                                   make_consumer(id(2), {1, 0, 100, -1, 1, 0}, 50)};
    const auto sol = solve_welfare(agents, 1);
    EXPECT_NEAR(sol.power.at(id(1)), sol.power.at(id(2)), 1e-7);
}

TEST(SolveWelfare, IdenticalGeneratorsSplitDemand) {
    for (double base : {0.0, 150.0, 700.0, 1500.0}) {
        std::vector<AgentState> agents{make_generator(id(1), {1.3, 0, 1000, -1, 1}, 0),
                                       make_generator(id(2), {1.3, 0, 1000, -1, 1}, 0),
                                       make_consumer(id(3), {0.7, 0, 300, -1, 1, base}, 0)};
        const auto sol = solve_welfare(agents, 1);
        EXPECT_NEAR(sol.power.at(id(1)), sol.power.at(id(2)), 1e-7);
        EXPECT_NEAR(sol.power.at(id(1)) * 2, total_demand(agents, sol.power), 1e-5);
    }
}

TEST(SolveWelfare, MatchesGridSearch) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> coef(0.5, 2), lo(0, 20), hi(60, 150), price(0.5, 2);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<AgentState> agents;
        agents.push_back(make_generator(id(1), {coef(rng), lo(rng), 400, -1, 1}, 100));
        const int consumers = 2 + trial % 2;
        for (int j = 0; j < consumers; ++j) {
            agents.push_back(make_consumer(id(10 + j), {coef(rng), lo(rng), hi(rng), -1, 1, 0}, 30));
        }
        const double pr = price(rng);
        const auto sol = solve_welfare(agents, pr);
        const auto [best, best_p] = grid_search(agents, pr);
        ASSERT_FALSE(best_p.empty());
        EXPECT_GE(sol.objective, best - 1e-9);
        for (const auto& a : agents) EXPECT_NEAR(sol.power.at(a.id), best_p.at(a.id), 1.0 * consumers + 1e-9);
    }
}

TEST(SolveWelfare, KktAndBalanceOnRandomInstances) {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = random_instance(rng);
        std::uniform_real_distribution<double> price(0.3, 3);
        const double pr = price(rng);
        const auto sol = solve_welfare(inst.agents, pr);
        const double d = total_demand(inst.agents, sol.power), g = total_generation(inst.agents, sol.power);
        EXPECT_LE(std::abs(d - g), 1e-9 * d);
        for (const auto& a : inst.agents) {
            const double p = sol.power.at(a.id);
            ASSERT_GE(p, a.p_min());
            ASSERT_LE(p, a.p_max());
            // Derivative of the Lagrangian with respect to p.
            auto s = a;
            s.power = p;
            const double slope = a.is_generator() ? local_gradient(s, pr) + sol.multiplier
                                                  : -local_gradient(s, pr) - sol.multiplier;
            if (p > a.p_min() && p < a.p_max()) {
                EXPECT_LE(std::abs(slope), 1e-6);
            } else if (p == a.p_max()) {
                EXPECT_GE(slope, -1e-6);
            } else {
                EXPECT_LE(slope, 1e-6);
            }
        }
    }
}

TEST(SolveWelfare, MultiplierRisesWithBaseLoad) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        auto inst = random_instance(rng);
        double prev = -INFINITY;
        for (double base = 0; base <= 600; base += 50) {
            auto agents = inst.agents;
            for (auto& a : agents) {
                if (!a.is_generator()) {
                    std::get<ConsumerParams>(a.params).base_load = base;
                    break;
                }
            }
            double lambda;
            try {
                lambda = solve_welfare(agents, 1).multiplier;
            } catch (const InfeasibleError&) {
                break;
            }
            EXPECT_GE(lambda, prev - 1e-9);
            prev = lambda;
        }
    }
}

TEST(SolveWelfare, InfeasibleReportsInterval) {
    std::vector<AgentState> agents{make_generator(id(1), {1, 500, 1000, -1, 1}, 500),
                                   make_consumer(id(2), {1, 0, 100, -1, 1, 0}, 0)};
    try {
        solve_welfare(agents, 1);
        FAIL() << "expected InfeasibleError";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.lower(), 100);
        EXPECT_EQ(e.upper(), 500);
    }
    std::vector<AgentState> short_supply{make_generator(id(1), {1, 0, 100, -1, 1}, 0),
                                         make_consumer(id(2), {1, 0, 100, -1, 1, 500}, 0)};
    EXPECT_THROW(solve_welfare(short_supply, 1), InfeasibleError);
    EXPECT_THROW(solve_welfare(agents, 0), NonpositivePriceError);
}

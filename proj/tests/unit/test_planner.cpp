#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "scoop/environment.hpp"
#include "scoop/planner.hpp"
#include "scoop/tasks.hpp"

using namespace scoop;

namespace {

ProblemInstance boxes_instance(int n, const std::string& hyp, bool rules_known = false) {
    auto spec = std::make_shared<const DomainSpec>(gen_boxes(n, 0, true, rules_known));
    return ground_instance(spec, spec->objects, hyp, parse_goal("accessible(item_b)"), 0);
}

Values observed(const ProblemInstance& inst) { return inst.model->project(inst.initial_state.values); }

InducedMDP chain(double gamma) {
    // 0 -go-> 1 -go-> 2 (reward 1 on the second hop); "stay" loops in place
    InducedMDP m;
    m.actions = {"go", "stay"};
    m.gamma = gamma;
    m.transitions = {{{{1, 1.0, 0.0}}, {{0, 1.0, 0.0}}}, {{{2, 1.0, 1.0}}, {{1, 1.0, 0.0}}}, {}};
    m.absorbing = {false, false, true};
    m.goal = {false, false, true};
    return m;
}

InducedMDP random_mdp(std::mt19937_64& rng, std::size_t n_states, std::size_t n_actions, double gamma) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    InducedMDP m;
    m.gamma = gamma;
    for (std::size_t a = 0; a < n_actions; ++a) m.actions.push_back(std::string(1, static_cast<char>('a' + a)));
    m.transitions.resize(n_states);
    m.absorbing.assign(n_states, false);
    m.goal.assign(n_states, false);
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            std::vector<MdpTransition> row;
            double total = 0.0;
            for (std::size_t t = 0; t < n_states; ++t) {
                if (u(rng) < 0.5) continue;
                row.push_back({t, u(rng), u(rng) * 2.0 - 1.0});
                total += row.back().probability;
            }
            if (row.empty()) row.push_back({rng() % n_states, 1.0, u(rng)}), total = 1.0;
            for (auto& t : row) t.probability /= total;
            m.transitions[s].push_back(std::move(row));
        }
    }
    return m;
}

/// Optimal values by evaluating every stationary deterministic policy exactly.
Eigen::VectorXd brute_optimum(const InducedMDP& m) {
    const auto n = m.size();
    const auto k = m.actions.size();
    std::vector<std::size_t> pi(n, 0);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), -1e300);
    for (;;) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        for (std::size_t s = 0; s < n; ++s) {
            for (const auto& t : m.transitions[s][pi[s]]) {
                P(s, t.next) += t.probability;
                r(s) += t.probability * t.reward;
            }
        }
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - m.gamma * P;
        const Eigen::VectorXd v = A.fullPivLu().solve(r);
        best = best.cwiseMax(v);
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (++pi[i] < k) break;
            pi[i] = 0;
        }
        if (i == n) break;
    }
    return best;
}

/// Finite-horizon optimum by unmemoized expectimax over every action sequence.
double expectimax(const InducedMDP& m, std::size_t s, int to_go) {
    if (to_go == 0 || m.absorbing[s]) return 0.0;
    double best = -1e300;
    for (const auto& row : m.transitions[s]) {
        double q = 0.0;
        for (const auto& t : row) q += t.probability * (t.reward + m.gamma * expectimax(m, t.next, to_go - 1));
        best = std::max(best, q);
    }
    return best;
}

} // namespace

TEST(InduceMdp, KnownBoxesIsThreeStateChain) {
    const auto inst = boxes_instance(1, "in:box_a", true);
    const auto [g, p] = create_graph(inst.model);
    const auto mdp = induce_mdp(p, observed(inst), inst);
    ASSERT_EQ(mdp.size(), 3u);
    EXPECT_EQ(mdp.actions, (std::vector<std::string>{"noop", "open(box_a)", "take(item_b)"}));
    EXPECT_EQ(std::count(mdp.goal.begin(), mdp.goal.end(), true), 1);
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        for (const auto& row : mdp.transitions[s]) {
            double total = 0.0;
            for (const auto& t : row) total += t.probability;
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
    }
    const auto plan = extract_plan(mdp, value_iterate(mdp));
    EXPECT_EQ(plan.steps, (std::vector<std::string>{"open(box_a)", "take(item_b)"}));
    // -0.1 + 0.95 * (-0.1 + 1)
    EXPECT_NEAR(plan.expected_value, -0.1 + 0.95 * 0.9, 1e-7);
}

TEST(InduceMdp, DegeneratePosteriorModesAgree) {
    const auto inst = boxes_instance(2, "in:box_b");
    const auto p = point_posterior(inst.model, inst.true_index);
    const auto a = induce_mdp(p, observed(inst), inst, PlanMode::Map);
    const auto b = induce_mdp(p, observed(inst), inst, PlanMode::Expected);
    EXPECT_EQ(a.states, b.states);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        ASSERT_EQ(a.transitions[s].size(), b.transitions[s].size());
        for (std::size_t k = 0; k < a.transitions[s].size(); ++k) {
            ASSERT_EQ(a.transitions[s][k].size(), b.transitions[s][k].size());
            for (std::size_t j = 0; j < a.transitions[s][k].size(); ++j) {
                EXPECT_EQ(a.transitions[s][k][j].next, b.transitions[s][k][j].next);
                EXPECT_DOUBLE_EQ(a.transitions[s][k][j].probability, b.transitions[s][k][j].probability);
            }
        }
    }
}

TEST(InduceMdp, ExpectedModeMixesDetectorOutcome) {
    auto spec = std::make_shared<const DomainSpec>(gen_blicket(2, {BlicketLaw::Or}));
    const auto inst = ground_instance(spec, spec->objects, "or:o1", parse_goal("detector=on"), 0);
    const auto& m = *inst.model;
    HypothesisPosterior p;
    p.model = inst.model;
    p.support = {*m.hypothesis_index("or:none"), *m.hypothesis_index("or:o2")};
    std::sort(p.support.begin(), p.support.end());
    p.probs = {0.5, 0.5};
    const auto mdp = induce_mdp(p, observed(inst), inst);
    const auto a = std::find(mdp.actions.begin(), mdp.actions.end(), "place(o2)") - mdp.actions.begin();
    const auto& row = mdp.transitions[mdp.start][static_cast<std::size_t>(a)];
    ASSERT_EQ(row.size(), 2u);
    const auto det = *m.feature_index("detector");
    for (const auto& t : row) {
        EXPECT_NEAR(t.probability, 0.5, 1e-12);
        EXPECT_EQ(mdp.goal[t.next], mdp.states[t.next][det] == 1);
    }
}

TEST(InduceMdp, StateCap) {
    const auto inst = boxes_instance(3, "in:box_c");
    const auto [g, p] = create_graph(inst.model);
    EXPECT_THROW(induce_mdp(p, observed(inst), inst, PlanMode::Expected, std::nullopt, 2), InferenceError);
}

TEST(ValueIterate, ChainHandValue) {
    const auto m = chain(0.9);
    const auto vf = value_iterate(m);
    EXPECT_NEAR(vf.values[0], 0.9, 1e-8);
    EXPECT_NEAR(vf.values[1], 1.0, 1e-8);
    EXPECT_EQ(vf.values[2], 0.0);
    EXPECT_EQ(extract_plan(m, vf).steps, (std::vector<std::string>{"go", "go"}));
}

TEST(ValueIterate, ZeroRewardsZeroValues) {
    auto m = chain(0.9);
    m.transitions[1][0][0].reward = 0.0;
    const auto vf = value_iterate(m);
    for (double v : vf.values) EXPECT_EQ(v, 0.0);
}

TEST(ValueIterate, UndiscountedNeedsHorizon) {
    auto m = chain(1.0);
    EXPECT_THROW(value_iterate(m), ContractViolation);
    m.horizon = 2;
    const auto vf = value_iterate(m);
    EXPECT_EQ(vf.sweeps, 2);
    EXPECT_DOUBLE_EQ(vf.values[0], 1.0);
    m.horizon = 1;
    EXPECT_DOUBLE_EQ(value_iterate(m).values[0], 0.0);
}

TEST(ExtractPlan, StartAtGoalIsEmpty) {
    const auto m = chain(0.9);
    const auto plan = extract_plan(m, value_iterate(m), 2);
    EXPECT_TRUE(plan.steps.empty());
    EXPECT_EQ(plan.expected_value, 0.0);
}

TEST(ExtractPlan, TiesGoToFirstAction) {
    InducedMDP m;
    m.actions = {"alpha", "beta"};
    m.gamma = 0.9;
    m.transitions = {{{{1, 1.0, 1.0}}, {{1, 1.0, 1.0}}}, {}};
    m.absorbing = {false, true};
    m.goal = {false, true};
    const auto plan = extract_plan(m, value_iterate(m));
    EXPECT_EQ(plan.steps, (std::vector<std::string>{"alpha"}));
    EXPECT_EQ(greedy_action({1.0, 1.0 + 1e-9, 0.5}), 0u);
    EXPECT_EQ(greedy_action({1.0, 1.1, 1.1}), 1u);
}

TEST(Property, ResidualsContractByGamma) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const double gamma = 0.5 + 0.45 * (k % 10) / 10.0;
        const auto m = random_mdp(rng, 6, 3, gamma);
        const auto vf = value_iterate(m);
        ASSERT_LE(vf.residuals.back(), 1e-8);
        for (std::size_t i = 1; i < vf.residuals.size(); ++i) {
            EXPECT_LE(vf.residuals[i], gamma * vf.residuals[i - 1] + 1e-12);
        }
    }
}

TEST(Property, MatchesPolicyEnumeration) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 2 + rng() % 5;
        const std::size_t na = 1 + rng() % 3;
        const auto m = random_mdp(rng, n, na, 0.8);
        const auto vf = value_iterate(m, 1e-12);
        const auto best = brute_optimum(m);
        const auto plan = extract_plan(m, vf);
        for (std::size_t s = 0; s < n; ++s) {
            EXPECT_NEAR(vf.values[s], best(static_cast<Eigen::Index>(s)), 1e-8);
            // first action attaining the exact optimum
            std::vector<double> q(na, 0.0);
            for (std::size_t a = 0; a < na; ++a) {
                for (const auto& t : m.transitions[s][a]) {
                    q[a] += t.probability * (t.reward + m.gamma * best(static_cast<Eigen::Index>(t.next)));
                }
            }
            const double top = *std::max_element(q.begin(), q.end());
            std::size_t first = 0;
            while (q[first] < top - 1e-6 * std::max(1.0, std::abs(top))) ++first;
            EXPECT_EQ(plan.policy.at(s), first);
        }
    }
}

TEST(Property, FiniteHorizonMatchesExpectimax) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 40; ++k) {
        auto m = random_mdp(rng, 2 + rng() % 4, 1 + rng() % 3, 1.0);
        m.horizon = 1 + static_cast<int>(rng() % 6);
        const auto vf = value_iterate(m);
        for (std::size_t s = 0; s < m.size(); ++s) EXPECT_NEAR(vf.values[s], expectimax(m, s, *m.horizon), 1e-9);
    }
}

TEST(Property, RewardScalingKeepsPolicy) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 50; ++k) {
        auto m = random_mdp(rng, 5, 3, 0.9);
        const auto a = extract_plan(m, value_iterate(m, 1e-12));
        for (auto& s : m.transitions) {
            for (auto& row : s) {
                for (auto& t : row) t.reward *= 7.5;
            }
        }
        const auto b = extract_plan(m, value_iterate(m, 1e-12));
        EXPECT_EQ(a.policy, b.policy);
        EXPECT_EQ(a.steps, b.steps);
    }
}

TEST(Property, PlansReachPredictedState) {
    for (int n = 1; n <= 3; ++n) {
        const auto spec = std::make_shared<const DomainSpec>(gen_boxes(n));
        for (const auto& h : spec->hypotheses) {
            const auto inst = ground_instance(spec, spec->objects, h.id, parse_goal("accessible(item_b)"), 0);
            const auto post = point_posterior(inst.model, inst.true_index);
            const auto mdp = induce_mdp(post, observed(inst), inst, PlanMode::Map);
            const auto plan = extract_plan(mdp, value_iterate(mdp));
            SocialActors actors{{}, make_profile(inst)};
            auto s = reset(inst).first;
            for (const auto& a : plan.steps) s = step(s, parse_action(a), NoOp{}, inst, actors).first;
            EXPECT_EQ(inst.model->project(s.values), mdp.states[plan.visited.back()]) << h.id;
            EXPECT_TRUE(inst.goal_holds(s.values)) << h.id;
            const int expected_len = h.id == "loose" ? 1 : (h.id[h.id.size() - 1] - 'a' + 1) + 1;
            EXPECT_EQ(static_cast<int>(plan.steps.size()), expected_len) << h.id;
        }
    }
}

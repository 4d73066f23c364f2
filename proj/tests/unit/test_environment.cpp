#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "scoop/environment.hpp"
#include "scoop/tasks.hpp"

using namespace scoop;

namespace {

ProblemInstance boxes(int n, const std::string& hyp) {
    auto spec = std::make_shared<const DomainSpec>(gen_boxes(n));
    return ground_instance(spec, spec->objects, hyp, parse_goal("accessible(item_b)"), 5);
}

ProblemInstance blicket(int n, std::set<BlicketLaw> laws, const std::string& hyp) {
    auto spec = std::make_shared<const DomainSpec>(gen_blicket(n, laws));
    return ground_instance(spec, spec->objects, hyp, parse_goal("detector=on"), 5);
}

std::string reading(const ProblemInstance& inst, const std::vector<Reading>& rs, const std::string& label) {
    const auto& m = *inst.model;
    for (const auto& r : rs) {
        if (m.features()[r.feature].label == label) return m.value_name(r.feature, r.value);
    }
    return "<absent>";
}

SocialActors actors_for(const ProblemInstance& inst) { return {{}, make_profile(inst)}; }

} // namespace

TEST(Reset, BoxesReportsClosedBox) {
    const auto inst = boxes(1, "in:box_a");
    const auto [s, obs] = reset(inst);
    EXPECT_EQ(s.t, 0);
    EXPECT_EQ(obs.kind, ObsKind::EnvSignal);
    EXPECT_EQ(reading(inst, obs.readings, "open(box_a)"), "false");
}

TEST(Reset, BlicketDetectorOffAndTwiceIdentical) {
    const auto inst = blicket(2, {BlicketLaw::Or}, "or:o1");
    const auto a = reset(inst);
    const auto b = reset(inst);
    EXPECT_EQ(reading(inst, a.second.readings, "detector"), "off");
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    EXPECT_EQ(a.second.text, "the detector is off.");
}

TEST(Step, BoxesOpenThenTake) {
    const auto inst = boxes(1, "in:box_a");
    auto actors = actors_for(inst);
    auto [s0, o0] = reset(inst);
    auto [s1, out1] = step(s0, parse_action("open(box_a)"), NoOp{}, inst, actors);
    EXPECT_EQ(reading(inst, out1.signal, "open(box_a)"), "true");
    EXPECT_EQ(reading(inst, out1.signal, "accessible(item_b)"), "false");
    EXPECT_DOUBLE_EQ(out1.cost_agent, -0.1);
    EXPECT_DOUBLE_EQ(out1.cost_query, 0.0);
    auto [s2, out2] = step(s1, parse_action("take(item_b)"), NoOp{}, inst, actors);
    EXPECT_EQ(reading(inst, out2.signal, "accessible(item_b)"), "true");
    EXPECT_TRUE(s2.terminal);
    EXPECT_DOUBLE_EQ(out2.reward_user, inst.goal_reward);
}

TEST(Step, TakeFromClosedBoxDoesNothing) {
    const auto inst = boxes(1, "in:box_a");
    auto actors = actors_for(inst);
    auto [s1, out] = step(reset(inst).first, parse_action("take(item_b)"), NoOp{}, inst, actors);
    EXPECT_EQ(reading(inst, out.signal, "accessible(item_b)"), "false");
    EXPECT_FALSE(s1.terminal);
}

TEST(Step, NoOpPairOnlyAdvancesTime) {
    const auto inst = boxes(2, "loose");
    auto actors = actors_for(inst);
    const auto s0 = reset(inst).first;
    auto [s1, out] = step(s0, NoOp{}, NoOp{}, inst, actors);
    EXPECT_EQ(s1.values, s0.values);
    EXPECT_EQ(s1.t, 1);
    EXPECT_DOUBLE_EQ(out.reward_user, 0.0);
    EXPECT_DOUBLE_EQ(out.cost_agent, 0.0);
    EXPECT_DOUBLE_EQ(out.cost_query, 0.0);
}

TEST(Step, BlicketPlaceUnderOrLaw) {
    const auto inst = blicket(2, {BlicketLaw::Or}, "or:o1");
    auto actors = actors_for(inst);
    auto [s1, out] = step(reset(inst).first, parse_action("place(o1)"), NoOp{}, inst, actors);
    EXPECT_EQ(reading(inst, out.signal, "detector"), "on");
    EXPECT_EQ(out.observation.text, "the detector is on. placed: o1.");
    EXPECT_TRUE(s1.terminal);

    const auto other = blicket(2, {BlicketLaw::Or}, "or:o1");
    auto [s2, out2] = step(reset(other).first, parse_action("place(o2)"), NoOp{}, other, actors);
    EXPECT_EQ(reading(other, out2.signal, "detector"), "off");
}

TEST(Step, TerminalStateIsContractViolation) {
    const auto inst = blicket(1, {BlicketLaw::Or}, "or:o1");
    auto actors = actors_for(inst);
    auto [s1, out] = step(reset(inst).first, parse_action("place(o1)"), NoOp{}, inst, actors);
    ASSERT_TRUE(s1.terminal);
    EXPECT_THROW(step(s1, NoOp{}, NoOp{}, inst, actors), ContractViolation);
}

TEST(Step, IllTypedActionIsRejectedNotThrown) {
    const auto inst = boxes(1, "in:box_a");
    auto actors = actors_for(inst);
    const auto s0 = reset(inst).first;
    for (const char* bad : {"open(item_b)", "fly(box_a)", "open(box_a,box_a)"}) {
        auto [s1, out] = step(s0, parse_action(bad), NoOp{}, inst, actors);
        EXPECT_TRUE(out.rejected);
        EXPECT_EQ(out.observation.kind, ObsKind::Error);
        EXPECT_EQ(out.observation.text.rfind("UnknownAction", 0), 0u);
        EXPECT_EQ(s1.values, s0.values);
    }
}

TEST(Step, QueriesChargeBetaWithoutDynamics) {
    const auto inst = blicket(2, {BlicketLaw::Or}, "or:o1");
    auto actors = actors_for(inst);
    const auto s0 = reset(inst).first;
    auto [s1, out] = step(s0, OracleQuery{EdgeQuery{"place(o1)", "detector"}}, NoOp{}, inst, actors);
    EXPECT_EQ(s1.values, s0.values);
    EXPECT_EQ(s1.t, 1);
    EXPECT_DOUBLE_EQ(out.cost_query, inst.oracle_query_cost);
    EXPECT_DOUBLE_EQ(out.cost_agent, 0.0);
    ASSERT_TRUE(out.observation.answer);
    EXPECT_DOUBLE_EQ(out.observation.answer->cost_charged, out.cost_query);

    auto [s2, out2] = step(s0, UserQuestion{}, NoOp{}, inst, actors);
    EXPECT_EQ(s2.values, s0.values);
    EXPECT_DOUBLE_EQ(out2.cost_query, inst.user_query_cost);
}

TEST(Step, UserActsAfterAgent) {
    const auto inst = blicket(2, {BlicketLaw::Or}, "or:o2");
    auto actors = actors_for(inst);
    auto [s1, out] = step(reset(inst).first, parse_action("place(o1)"), parse_action("place(o2)"), inst, actors);
    EXPECT_EQ(reading(inst, out.observation.readings, "detector"), "off"); // agent's own result
    EXPECT_EQ(reading(inst, out.signal, "detector"), "on");                // after the user's move
    EXPECT_DOUBLE_EQ(out.reward_user, inst.goal_reward);
}

TEST(Step, MaxStepsTerminates) {
    auto inst = boxes(1, "in:box_a");
    inst.max_steps = 2;
    auto actors = actors_for(inst);
    auto s = reset(inst).first;
    s = step(s, NoOp{}, NoOp{}, inst, actors).first;
    EXPECT_FALSE(s.terminal);
    s = step(s, NoOp{}, NoOp{}, inst, actors).first;
    EXPECT_TRUE(s.terminal);
}

TEST(Observe, HiddenFeaturesNeverAppear) {
    const auto inst = blicket(3, {BlicketLaw::Or, BlicketLaw::And}, "and:o1,o3");
    const auto obs = observe(reset(inst).first, inst);
    for (const auto& r : obs.readings) EXPECT_TRUE(inst.model->observable(r.feature));
    EXPECT_EQ(reading(inst, obs.readings, "blicket(o1)"), "<absent>");
    EXPECT_EQ(obs, observe(reset(inst).first, inst));
    EXPECT_EQ(obs.text.find("blicket"), std::string::npos);
}

TEST(Render, TemplatesAndOrdering) {
    const auto inst = boxes(1, "in:box_a");
    auto actors = actors_for(inst);
    auto [s1, out] = step(reset(inst).first, parse_action("open(box_a)"), NoOp{}, inst, actors);
    EXPECT_EQ(out.observation.text, "item_b is not accessible. box_a is open.");
    EXPECT_EQ(render_observation_text(Observation{}, inst), "");

    const auto b = blicket(2, {BlicketLaw::Or}, "or:o1");
    auto ab = actors_for(b);
    auto [t1, o1] = step(reset(b).first, parse_action("place(o2)"), NoOp{}, b, ab);
    auto [t2, o2] = step(t1, parse_action("place(o1)"), NoOp{}, b, ab);
    EXPECT_EQ(render_observation_text(observe(t2, b), b), "the detector is on. placed: o1, o2.");
}

TEST(ObservationJson, RoundTrip) {
    const auto inst = blicket(2, {BlicketLaw::Or}, "or:o1");
    auto actors = actors_for(inst);
    auto [s1, out] = step(reset(inst).first, OracleQuery{EdgeQuery{"place(o2)", "detector"}}, NoOp{}, inst, actors);
    const auto j = to_json(out.observation, *inst.model);
    EXPECT_EQ(observation_from_json(j, *inst.model), out.observation);
}

TEST(Determinism, SameActionsSameTrajectory) {
    const auto inst = blicket(3, {BlicketLaw::Or}, "or:o2,o3");
    auto run = [&] {
        auto actors = actors_for(inst);
        std::vector<std::uint64_t> digests;
        auto s = reset(inst).first;
        for (const char* a : {"place(o1)", "remove(o1)", "place(o3)"}) {
            if (s.terminal) break;
            auto [n, out] = step(s, parse_action(a), NoOp{}, inst, actors);
            digests.push_back(out.next_state_digest);
            s = n;
        }
        return digests;
    };
    EXPECT_EQ(run(), run());
}

TEST(Property, TypingConservedUnderRandomActions) {
    std::mt19937_64 rng(42);
    const std::vector<ProblemInstance> insts{blicket(3, {BlicketLaw::Or, BlicketLaw::And}, "and:o1,o2"), boxes(3, "in:box_c"),
                                             ground_instance(std::make_shared<const DomainSpec>(load_domain(SCOOP_TEST_DATA "/lamp.json")),
                                                             load_domain(SCOOP_TEST_DATA "/lamp.json").objects, "fuse-blown",
                                                             parse_goal("lit(lamp)"), 3)};
    int sequences = 0;
    for (; sequences < 10000; ++sequences) {
        auto inst = insts[sequences % insts.size()];
        inst.max_steps = 1000;
        inst.goal_assigns.clear();
        inst.goal_assigns.push_back(Assign{0, 250}); // unreachable, keeps episodes running
        auto actors = actors_for(inst);
        const auto& m = *inst.model;
        auto s = reset(inst).first;
        for (int k = 0; k < 6; ++k) {
            const auto a = m.actions()[rng() % m.actions().size()];
            const auto u = rng() % 3 == 0 ? UserAction{m.actions()[rng() % m.actions().size()]} : UserAction{NoOp{}};
            s = step(s, a, u, inst, actors).first;
            ASSERT_EQ(s.values.size(), m.features().size());
            for (std::size_t f = 0; f < s.values.size(); ++f) ASSERT_LT(s.values[f], m.decl(f).values.size());
            ASSERT_TRUE(m.admissible(s.values));
        }
    }
    EXPECT_EQ(sequences, 10000);
}

TEST(Property, DeterministicRulesFireExactlyWhenEnabled) {
    // every admissible state x action x hypothesis of a 3-object blicket domain
    auto spec = std::make_shared<const DomainSpec>(gen_blicket(3, {BlicketLaw::Or, BlicketLaw::And}));
    const auto model = Model::build(spec, spec->objects);
    const auto& m = *model;
    int checked = 0;
    m.find_admissible([&](const Values& s) {
        for (std::size_t h = 0; h < m.hypotheses().size(); ++h) {
            const auto truth = oracle::parse_hypothesis(m.hypotheses()[h].id);
            const Values start = m.with_hidden(s, h);
            for (std::size_t a = 0; a < m.actions().size(); ++a) {
                const auto succ = m.successors(start, a, h);
                EXPECT_EQ(succ.size(), 1u);
                std::set<std::string> placed;
                for (const auto& r : observable_readings(m, succ.front().next)) {
                    const auto& label = m.features()[r.feature].label;
                    if (label.rfind("placed(", 0) == 0 && m.value_name(r.feature, r.value) == "true") {
                        placed.insert(oracle::arg_of(label));
                    }
                }
                const auto& act = m.actions()[a];
                EXPECT_EQ(placed.count(act.args[0]) > 0, act.name == "place");
                const auto det = *m.feature_index("detector");
                EXPECT_EQ(m.value_name(det, succ.front().next[det]) == "on", oracle::detector_on(truth, placed));
                ++checked;
            }
        }
        return false;
    });
    EXPECT_GT(checked, 0);
}

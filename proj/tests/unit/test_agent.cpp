#include <gtest/gtest.h>

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "scoop/agent.hpp"
#include "scoop/harness.hpp"
#include "scoop/tasks.hpp"

using namespace scoop;

namespace {

/// Replays fixed replies (the last one repeats) and records what it was shown.
class Canned : public Reasoner {
public:
    explicit Canned(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string respond(const ReasonerRequest& r) override {
        prompts.push_back(r.prompt);
        snapshots.push_back(r.memory.entries());
        const auto i = std::min(calls++, replies_.size() - 1);
        return replies_[i];
    }
    std::size_t calls = 0;
    std::vector<std::string> prompts;
    std::vector<std::vector<MemoryEntry>> snapshots;

private:
    std::vector<std::string> replies_;
};

struct Setup {
    ProblemInstance inst;
    SocialActors actors;
    AgentKnowledge knowledge;
    EpisodeTrace trace;
};

Setup make(DomainSpec d, const std::string& hyp, const std::string& goal) {
    Setup s;
    auto spec = std::make_shared<const DomainSpec>(std::move(d));
    s.inst = ground_instance(spec, spec->objects, hyp, parse_goal(goal), 0);
    s.actors = {{}, make_profile(s.inst)};
    std::tie(s.knowledge.graph, s.knowledge.posterior) = create_graph(s.inst.model);
    return s;
}

Setup blicket2(const std::string& hyp = "or:o1") { return make(gen_blicket(2, {BlicketLaw::Or}), hyp, "detector=on"); }

EpisodeContext context(const std::string& prompt = "goal: detector=on") { return {prompt, "test domain", ""}; }

bool same_entry(const MemoryEntry& a, const MemoryEntry& b) {
    return a.index == b.index && a.step == b.step && a.observation == b.observation;
}

} // namespace

TEST(ParseReactStep, Labels) {
    const auto s = parse_react_step("Thought: t\nAction: CausalRefinementAndAction\nAction Input: refine");
    ASSERT_TRUE(s);
    EXPECT_EQ(s->thought, "t");
    EXPECT_EQ(s->action, "CausalRefinementAndAction");
    EXPECT_EQ(s->action_input, "refine");
    EXPECT_TRUE(s->answer.empty());

    const auto a = parse_react_step("Answer: done");
    ASSERT_TRUE(a);
    EXPECT_EQ(a->answer, "done");
    EXPECT_TRUE(a->action.empty());

    EXPECT_FALSE(parse_react_step("hello"));
    EXPECT_FALSE(parse_react_step(""));
}

TEST(ParseReactStep, AnyOrderLastWins) {
    const auto s = parse_react_step("Action Input: x\nAction: EnvAct\nThought: a\nAction Input: place(o1)\n  Thought:  b  ");
    ASSERT_TRUE(s);
    EXPECT_EQ(s->action_input, "place(o1)");
    EXPECT_EQ(s->thought, "b");
    EXPECT_EQ(parse_react_step(format_react_step(*s)), s);
}

TEST(ConversationMemory, IndicesIncrease) {
    ConversationMemory m;
    m.append("start");
    m.append(ReActStep{"t", "Observe", "", ""});
    m.append("obs");
    ASSERT_EQ(m.size(), 3u);
    for (std::size_t i = 1; i < m.size(); ++i) EXPECT_GT(m.entries()[i].index, m.entries()[i - 1].index);
    EXPECT_NE(m.render().find("obs"), std::string::npos);
}

TEST(BuildPrompt, EmbedsContextMemoryAndFormat) {
    ConversationMemory m;
    m.append("start. the detector is off.");
    const auto p = build_prompt(context("please light it"), m);
    EXPECT_NE(p.find("please light it"), std::string::npos);
    EXPECT_NE(p.find("test domain"), std::string::npos);
    EXPECT_NE(p.find("the detector is off."), std::string::npos);
    EXPECT_NE(p.find(format_instructions()), std::string::npos);
    for (const auto& tool : tool_names()) EXPECT_NE(p.find(tool), std::string::npos) << tool;
}

TEST(RunEpisode, AnswerAtFirstStep) {
    auto s = blicket2();
    Canned r({"Thought: nothing to do\nAnswer: done"});
    const auto res = run_episode(s.inst, context(), {}, r, s.actors, s.knowledge);
    EXPECT_TRUE(res.answered);
    EXPECT_EQ(res.answer, "done");
    EXPECT_EQ(res.trace.react.size(), 1u);
    EXPECT_TRUE(res.trace.steps.empty());
    EXPECT_EQ(res.trace.outcome, "answered");
}

TEST(RunEpisode, UnknownActionContinues) {
    auto s = blicket2();
    Canned r({"Action: Foo\nAction Input: bar", "Answer: ok"});
    const auto res = run_episode(s.inst, context(), {}, r, s.actors, s.knowledge);
    ASSERT_EQ(res.trace.react.size(), 2u);
    EXPECT_EQ(res.trace.react[0].observation.rfind("UnknownAction", 0), 0u);
    EXPECT_TRUE(res.answered);
    EXPECT_TRUE(res.trace.steps.empty()); // nothing reached the environment
}

TEST(RunEpisode, IterationBudget) {
    auto s = blicket2();
    AgentConfig cfg;
    cfg.max_steps = 3;
    Canned r({"Action: Observe"});
    const auto res = run_episode(s.inst, context(), cfg, r, s.actors, s.knowledge);
    EXPECT_FALSE(res.answered);
    EXPECT_EQ(res.failure, "iteration limit reached");
    EXPECT_EQ(r.calls, 3u);
    EXPECT_EQ(res.trace.react.size(), 3u);
    EXPECT_EQ(res.trace.outcome, "failed");
}

TEST(RunEpisode, BranchTable) {
    // (answer?, known tool?, causal tool?) -> branch
    struct Row {
        std::string reply;
        std::string expect_prefix;
        bool answered;
    };
    const std::vector<Row> rows{
        {"Answer: a\nAction: Foo", "", true},
        {"Answer: a\nAction: EnvAct\nAction Input: place(o1)", "", true},
        {"Answer: a\nAction: CausalRefinementAndAction\nAction Input: plan", "", true},
        {"Action: Foo", "UnknownAction", false},
        {"Action: EnvAct\nAction Input: place(o1)", "the detector is on.", false},
        {"Action: CausalRefinementAndAction\nAction Input: refine", "intervened with place(o1)", false},
    };
    for (const auto& row : rows) {
        auto s = blicket2();
        Canned r({row.reply, "Answer: stop"});
        const auto res = run_episode(s.inst, context(), {}, r, s.actors, s.knowledge);
        if (row.answered) {
            EXPECT_EQ(res.trace.react.size(), 1u) << row.reply;
            EXPECT_EQ(res.answer, "a");
            EXPECT_TRUE(res.trace.steps.empty());
        } else {
            ASSERT_EQ(res.trace.react.size(), 2u) << row.reply;
            EXPECT_EQ(res.trace.react[0].observation.rfind(row.expect_prefix, 0), 0u) << res.trace.react[0].observation;
        }
    }
}

TEST(RunEpisode, MemoryIsAppendOnly) {
    auto s = blicket2("or:o2");
    Canned r({"Action: EnvAct\nAction Input: place(o1)", "Action: Observe", "Action: Foo", "garbage",
              "Action: AskOracle\nAction Input: edge place(o2) -> detector", "Answer: x"});
    run_episode(s.inst, context(), {}, r, s.actors, s.knowledge);
    ASSERT_EQ(r.snapshots.size(), 6u);
    for (std::size_t k = 1; k < r.snapshots.size(); ++k) {
        const auto& prev = r.snapshots[k - 1];
        const auto& cur = r.snapshots[k];
        ASSERT_GE(cur.size(), prev.size());
        for (std::size_t i = 0; i < prev.size(); ++i) EXPECT_TRUE(same_entry(prev[i], cur[i]));
        // a tool call adds the step and its observation; a malformed reply adds the reformat note
        EXPECT_EQ(cur.size() - prev.size(), k == 4 ? 1u : 2u) << k;
    }
}

TEST(RunEpisode, MalformedRetriesOnceThenFails) {
    auto s = blicket2();
    Canned ok({"nonsense", "Answer: fine"});
    EXPECT_TRUE(run_episode(s.inst, context(), {}, ok, s.actors, s.knowledge).answered);

    auto t = blicket2();
    Canned bad({"nonsense", "still nonsense"});
    const auto res = run_episode(t.inst, context(), {}, bad, t.actors, t.knowledge);
    EXPECT_FALSE(res.answered);
    EXPECT_EQ(res.failure, "malformed reasoner output");
    EXPECT_EQ(bad.calls, 2u);
}

TEST(RunEpisode, PromptCarriesGoalIntoKnowledge) {
    auto s = blicket2();
    Canned r({"Answer: ok"});
    run_episode(s.inst, context("goal: detector=on"), {}, r, s.actors, s.knowledge);
    ASSERT_TRUE(s.knowledge.goal);
    EXPECT_EQ(s.knowledge.goal->str(), "detector=on");
    run_episode(s.inst, context("help me please"), {}, r, s.actors, s.knowledge);
    EXPECT_FALSE(s.knowledge.goal);
}

TEST(Subroutine, RefineAsksCheapOracle) {
    auto s = blicket2();
    AgentConfig cfg;
    cfg.oracle_cost = 0.05; // below the 0.1 intervention cost
    EpisodeEnv env(s.inst, s.actors, s.trace);
    const auto obs = causal_refinement_and_action("refine", s.knowledge, cfg, env, 0);
    EXPECT_EQ(obs.rfind("asked oracle \"edge place(o1) -> detector\"", 0), 0u) << obs;
    EXPECT_EQ(s.knowledge.posterior.support.size(), 2u);
    ASSERT_EQ(s.trace.decisions.size(), 1u);
    EXPECT_EQ(s.trace.decisions[0].chosen, "ask_oracle");
    EXPECT_NEAR(s.trace.decisions[0].gain_bits, 1.0, 1e-12);
    EXPECT_TRUE(s.trace.decisions[0].splits);
    ASSERT_EQ(s.trace.steps.size(), 1u);
    ASSERT_TRUE(s.trace.steps[0].oracle);
    EXPECT_DOUBLE_EQ(s.trace.steps[0].beta, -0.5);
    EXPECT_NE(obs.find("hypotheses 4 -> 2"), std::string::npos);
}

TEST(Subroutine, RefineInterveneWhenCheaper) {
    auto s = blicket2();
    EpisodeEnv env(s.inst, s.actors, s.trace);
    const auto obs = causal_refinement_and_action("refine", s.knowledge, {}, env, 0);
    EXPECT_EQ(obs.rfind("intervened with place(o1)", 0), 0u) << obs;
    EXPECT_EQ(s.trace.decisions.at(0).chosen, "intervene");
    EXPECT_NEAR(*s.trace.decisions.at(0).intervention_cost, 0.1, 1e-12);
}

TEST(Subroutine, PlanOnKnownBoxes) {
    auto s = make(gen_boxes(1, 0, true, true), "in:box_a", "accessible(item_b)");
    s.knowledge.goal = parse_goal("accessible(item_b)");
    EpisodeEnv env(s.inst, s.actors, s.trace);
    const auto obs = causal_refinement_and_action("plan", s.knowledge, {}, env, 0);
    EXPECT_NE(obs.find("executed open(box_a)"), std::string::npos) << obs;
    EXPECT_NE(obs.find("box_a is open."), std::string::npos) << obs;
    EXPECT_TRUE(s.trace.decisions.empty());
    ASSERT_EQ(s.trace.plans.size(), 1u);
    EXPECT_EQ(s.trace.plans[0].steps, (std::vector<std::string>{"open(box_a)", "take(item_b)"}));
    EXPECT_EQ(env.state().values[*s.inst.model->feature_index("open(box_a)")], 1);
}

TEST(Subroutine, DegenerateHasNoGain) {
    auto s = blicket2();
    s.knowledge.posterior = point_posterior(s.inst.model, s.inst.true_index);
    s.knowledge.graph = derive_graph(s.knowledge.posterior);
    EpisodeEnv env(s.inst, s.actors, s.trace);
    const auto obs = causal_refinement_and_action("refine", s.knowledge, {}, env, 0);
    EXPECT_NE(obs.find("no significant gain"), std::string::npos) << obs;
    EXPECT_TRUE(s.trace.steps.empty());
}

TEST(Subroutine, BadInputBecomesErrorText) {
    auto s = blicket2();
    const AgentConfig cfg;
    const auto domain_before = s.inst.domain();
    EpisodeEnv env(s.inst, s.actors, s.trace);
    EXPECT_EQ(causal_refinement_and_action("dance", s.knowledge, cfg, env, 0).rfind("error:", 0), 0u);
    EXPECT_EQ(causal_refinement_and_action("", s.knowledge, cfg, env, 0).rfind("error:", 0), 0u);
    EXPECT_EQ(s.inst.domain(), domain_before);
}

TEST(ScriptedReasoner, PolicyRules) {
    auto s = blicket2();
    const AgentConfig cfg;
    auto state = s.inst.initial_state;
    AgentView v{&s.inst, &s.knowledge, &state, &cfg, &s.trace, false, false};
    auto step = scripted_reasoner_step(v);
    EXPECT_EQ(step.action, "AskUser");
    EXPECT_EQ(step.action_input, "goal");

    s.knowledge.goal = parse_goal("detector=on");
    step = scripted_reasoner_step(v);
    EXPECT_EQ(step.action, std::string(kCausalAction));
    EXPECT_EQ(step.action_input, "refine+plan");

    v.goal_satisfied = true;
    step = scripted_reasoner_step(v);
    EXPECT_EQ(step.answer, "goal achieved");

    v.goal_satisfied = false;
    s.knowledge.posterior = point_posterior(s.inst.model, s.inst.true_index);
    s.knowledge.graph = derive_graph(s.knowledge.posterior);
    step = scripted_reasoner_step(v);
    EXPECT_EQ(step.action, std::string(kCausalAction));
    EXPECT_EQ(step.action_input, "plan");
}

TEST(ScriptedReasoner, BaselineAndPlannerNeverUseCausalTool) {
    for (auto kind : {AgentKind::Baseline, AgentKind::Planner}) {
        auto s = blicket2("or:o2");
        Agent agent(kind, {});
        const auto res = agent.run(s.inst, context(), s.actors);
        EXPECT_TRUE(res.answered) << to_string(kind);
        for (const auto& r : res.trace.react) EXPECT_NE(r.action, std::string(kCausalAction));
        EXPECT_EQ(res.trace.oracle_queries(), kind == AgentKind::Baseline ? 1 : 0);
    }
}

TEST(Agent, CausalSolvesBlicketAndCarriesKnowledge) {
    const auto session = sample_session(gen_explore_exploit(3, 0.5, 4));
    Agent agent(AgentKind::Causal, {});
    int queries = 0;
    for (const auto& inst : session) {
        SocialActors actors{{}, make_profile(inst)};
        const auto res = agent.run(inst, make_context(inst, true), actors);
        EXPECT_EQ(res.answer, "goal achieved");
        queries += res.trace.oracle_queries();
        EXPECT_GT(agent.knowledge().posterior.prob_of(inst.true_index), 0.0);
    }
    EXPECT_LE(queries, 2);
}

TEST(Agent, DeterministicTraces) {
    auto once = [] {
        const auto session = sample_session(gen_explore_exploit(2, 0.5, 9));
        Agent agent(AgentKind::Causal, {});
        std::string out;
        for (const auto& inst : session) {
            SocialActors actors{{}, make_profile(inst, "greedy-goal")};
            out += to_jsonl(agent.run(inst, {"goal: detector=on", "", ""}, actors).trace);
        }
        return out;
    };
    const auto a = once();
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, once());
}

TEST(Agent, RejectsBadConfig) {
    AgentConfig c;
    c.max_steps = 0;
    EXPECT_THROW(Agent(AgentKind::Causal, c), ValidationError);
    EXPECT_THROW(parse_agent_kind("wizard"), Error);
    EXPECT_EQ(parse_agent_kind(to_string(AgentKind::Omniscient)), AgentKind::Omniscient);
}

TEST(FreeExploration, ZeroBudgetLeavesPosterior) {
    auto s = blicket2();
    const auto before = s.knowledge.posterior;
    const auto after = free_exploration(s.inst, 0.0, s.actors, {}, s.knowledge, s.trace);
    EXPECT_EQ(after.support, before.support);
    EXPECT_TRUE(s.trace.steps.empty());
}

TEST(FreeExploration, TwoQueriesResolveFourHypotheses) {
    auto s = blicket2("or:o2");
    AgentConfig cfg;
    cfg.oracle_cost = 0.05; // query rather than intervene
    const auto after = free_exploration(s.inst, 2 * 0.5, s.actors, cfg, s.knowledge, s.trace);
    EXPECT_EQ(after.support.size(), 1u);
    EXPECT_EQ(after.ids().front(), "or:o2");
    EXPECT_LE(s.trace.oracle_queries(), 2);
    EXPECT_DOUBLE_EQ(s.trace.beta_sum(), -1.0);
}

TEST(FreeExploration, InterventionsAutoResetTheScene) {
    auto s = blicket2("or:o1,o2");
    const auto after = free_exploration(s.inst, 1.0, s.actors, {}, s.knowledge, s.trace);
    EXPECT_EQ(after.ids(), (std::vector<std::string>{"or:o1,o2"}));
    EXPECT_EQ(s.trace.oracle_queries(), 0);
}

TEST(FreeExploration, BelowThresholdStopsImmediately) {
    auto s = blicket2();
    AgentConfig cfg;
    cfg.gain_threshold = 5.0;
    free_exploration(s.inst, 10.0, s.actors, cfg, s.knowledge, s.trace);
    EXPECT_TRUE(s.trace.steps.empty());
    EXPECT_TRUE(s.trace.decisions.empty());
}

TEST(ExternalReasoner, TalksToEndpoint) {
    httplib::Server server;
    std::string seen;
    server.Post("/step", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body).at("prompt");
        res.set_content(R"({"text": "Thought: remote\nAnswer: done"})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto s = blicket2();
    ExternalReasoner r("http://127.0.0.1:" + std::to_string(port) + "/step", 5);
    const auto res = run_episode(s.inst, context(), {}, r, s.actors, s.knowledge);
    server.stop();
    th.join();
    EXPECT_TRUE(res.answered);
    EXPECT_EQ(res.answer, "done");
    EXPECT_NE(seen.find(format_instructions()), std::string::npos);
}

TEST(ExternalReasoner, UnreachableEndpointIsMalformed) {
    auto s = blicket2();
    ExternalReasoner r("http://127.0.0.1:1/none", 1);
    const auto res = run_episode(s.inst, context(), {}, r, s.actors, s.knowledge);
    EXPECT_EQ(res.failure, "malformed reasoner output");
}

TEST(ExternalReasoner, FromEnv) {
    unsetenv("SCOOP_REASONER_URL");
    EXPECT_THROW(ExternalReasoner::from_env(), Error);
    setenv("SCOOP_REASONER_URL", "http://127.0.0.1:9/x", 1);
    EXPECT_TRUE(ExternalReasoner::from_env());
    unsetenv("SCOOP_REASONER_URL");
}

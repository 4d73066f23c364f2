#include "scoop/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include <httplib.h>

#include "scoop/error.hpp"
#include "scoop/format.hpp"

namespace scoop {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<Goal> goal_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        auto s = trim(line);
        auto pos = s.find("goal:");
        if (pos == std::string_view::npos) continue;
        try {
            return parse_goal(trim(s.substr(pos + 5)));
        } catch (const ParseError&) {
        }
    }
    return std::nullopt;
}

ProblemInstance planning_instance(const ProblemInstance& instance, const AgentKnowledge& k) {
    ProblemInstance inst = instance;
    if (k.goal) {
        if (auto g = instance.model->compile(k.goal->all)) inst.goal_assigns = *g;
    }
    return inst;
}

Plan current_plan(const AgentKnowledge& k, const WorldState& state, const ProblemInstance& instance,
                  const AgentConfig& config) {
    const auto inst = planning_instance(instance, k);
    std::optional<int> horizon;
    if (inst.gamma >= 1.0) horizon = std::max(1, inst.max_steps - state.t);
    auto mdp = induce_mdp(k.posterior, state.values, inst, config.plan_mode, horizon);
    auto vf = value_iterate(mdp);
    return extract_plan(mdp, vf);
}

ReActStep answer(std::string thought, std::string text) { return {std::move(thought), "", "", std::move(text)}; }

std::optional<ReActStep> common_prefix(const AgentView& v) {
    if (!v.knowledge->goal) return ReActStep{"The goal is unknown, so ask the user.", "AskUser", "goal", ""};
    if (v.goal_satisfied) return answer("The goal holds in the current observation.", "goal achieved");
    if (v.terminal) return answer("No environment steps remain.", "stopped: step limit reached");
    return std::nullopt;
}

std::string edge_text(const Edge& e) { return e.first + " -> " + e.second; }

} // namespace

// ReAct format ----------------------------------------------------------------

std::optional<ReActStep> parse_react_step(std::string_view text) {
    ReActStep step;
    bool any = false;
    std::istringstream in{std::string(text)};
    static const std::pair<std::string_view, std::string ReActStep::*> labels[] = {
        {"Action Input:", &ReActStep::action_input},
        {"Thought:", &ReActStep::thought},
        {"Action:", &ReActStep::action},
        {"Answer:", &ReActStep::answer},
    };
    for (std::string line; std::getline(in, line);) {
        auto s = trim(line);
        for (const auto& [label, field] : labels) {
            if (s.substr(0, label.size()) == label) {
                step.*field = std::string(trim(s.substr(label.size())));
                any = true;
                break;
            }
        }
    }
    if (!any) return std::nullopt;
    return step;
}

std::string format_react_step(const ReActStep& step) {
    std::string out = "Thought: " + step.thought + "\n";
    if (!step.answer.empty()) return out + "Answer: " + step.answer + "\n";
    return out + "Action: " + step.action + "\nAction Input: " + step.action_input + "\n";
}

void ConversationMemory::append(const ReActStep& step) {
    entries_.push_back({static_cast<int>(entries_.size()), step, {}});
}

void ConversationMemory::append(std::string observation) {
    entries_.push_back({static_cast<int>(entries_.size()), std::nullopt, std::move(observation)});
}

std::string ConversationMemory::render() const {
    std::string out;
    for (const auto& e : entries_) {
        out += "[" + std::to_string(e.index) + "] ";
        if (e.step) {
            std::string body = format_react_step(*e.step);
            for (auto pos = body.find('\n'); pos != std::string::npos && pos + 1 < body.size();
                 pos = body.find('\n', pos + 1)) {
                body.replace(pos, 1, " | ");
            }
            if (!body.empty() && body.back() == '\n') body.pop_back();
            out += body;
        } else {
            out += "Observation: " + e.observation;
        }
        out += '\n';
    }
    return out;
}

const std::vector<std::string>& tool_names() {
    static const std::vector<std::string> names{"AskOracle", "AskUser", "EnvAct", "Observe"};
    return names;
}

const std::string& format_instructions() {
    static const std::string text =
        "Reply with labeled lines:\n"
        "Thought: <reasoning>\n"
        "Action: <CausalRefinementAndAction | AskOracle | AskUser | EnvAct | Observe>\n"
        "Action Input: <refine | plan | refine+plan, an oracle query, a user question, or a ground action>\n"
        "Answer: <final answer; leave out until done>\n"
        "Oracle queries: \"edge <cause> -> <effect>\", \"rule <id>\", \"state <feature>\", "
        "\"mechanism <id> <args>\". User questions: \"goal\", \"preference <feature>\".\n";
    return text;
}

std::string build_prompt(const EpisodeContext& context, const ConversationMemory& memory) {
    return "User: " + context.user_prompt + "\nEnvironment: " + context.environment_description + "\nMemory:\n" +
           memory.render() + format_instructions();
}

// Environment handle ----------------------------------------------------------

EpisodeEnv::EpisodeEnv(const ProblemInstance& instance, SocialActors& actors, EpisodeTrace& trace, bool auto_reset)
    : instance_(instance), actors_(actors), trace_(trace), state_(reset(instance).first), auto_reset_(auto_reset) {
    if (auto_reset_) state_.terminal = false;
}

EpisodeEnv::Result EpisodeEnv::act(const AgentAction& action, int iteration) {
    const auto& m = *instance_.model;
    Result r;
    r.pre = observable_readings(m, state_.values);
    const auto user = user_act(state_, actors_.user, instance_);

    StepRecord rec;
    rec.seq = trace_.next_seq++;
    rec.t = state_.t;
    rec.iteration = iteration;
    rec.state_digest = m.digest(state_.values);
    rec.agent_action = to_string(action);
    rec.user_action = to_string(user);

    auto [next, out] = step(state_, action, user, instance_, actors_);
    rec.obs = to_json(out.observation, m);
    rec.r_u = out.reward_user;
    rec.r_a = out.cost_agent;
    rec.beta = out.cost_query;
    if (out.observation.answer) {
        const auto& a = *out.observation.answer;
        rec.oracle = OracleLog{to_string(std::get<OracleQuery>(action)), std::string(to_string(a.kind)), a.text,
                               a.cost_charged};
    }
    if (actors_.user.human && actors_.user.human->out) {
        *actors_.user.human->out << "[t=" << rec.t << "] agent: " << rec.agent_action << " | you: " << rec.user_action
                                 << " | " << render_observation_text(out.observation, instance_) << "\n";
    }
    trace_.steps.push_back(std::move(rec));

    if (const auto* g = std::get_if<GroundAction>(&action); g && !out.rejected) {
        r.env_actions.push_back(*resolve_action(*g, instance_));
    }
    if (const auto* g = std::get_if<GroundAction>(&user)) {
        if (auto a = resolve_action(*g, instance_)) r.env_actions.push_back(*a);
    }
    if (out.user_message) user_message_ = out.user_message;

    state_ = std::move(next);
    if (auto_reset_ && state_.terminal) {
        state_.values = instance_.initial_state.values;
        state_.terminal = false;
    }
    r.outcome = std::move(out);
    return r;
}

std::optional<std::string> EpisodeEnv::take_user_message() {
    auto m = std::move(user_message_);
    user_message_.reset();
    return m;
}

void AgentKnowledge::absorb(const EpisodeEnv::Result& result) {
    if (!result.env_actions.empty()) {
        posterior = update(posterior, InterventionResult{result.env_actions, result.pre, result.outcome.signal});
    }
    if (const auto& a = result.outcome.observation.answer) posterior = update(posterior, OracleChunk{*a});
    graph = derive_graph(posterior);
}

// Agents and reasoners --------------------------------------------------------

std::string_view to_string(AgentKind k) {
    switch (k) {
    case AgentKind::Causal: return "causal";
    case AgentKind::Baseline: return "baseline";
    case AgentKind::Planner: return "planner";
    case AgentKind::Omniscient: return "omniscient";
    }
    return "causal";
}

AgentKind parse_agent_kind(std::string_view s) {
    for (auto k : {AgentKind::Causal, AgentKind::Baseline, AgentKind::Planner, AgentKind::Omniscient}) {
        if (to_string(k) == s) return k;
    }
    throw ParseError("agent", "unknown agent \"" + std::string(s) + "\"");
}

ReActStep scripted_reasoner_step(const AgentView& v) {
    if (auto s = common_prefix(v)) return *s;
    const auto& k = *v.knowledge;
    const auto inst = planning_instance(*v.instance, k);
    const auto proposal = estimate_refinement(k.posterior, k.graph, v.state->values, inst, *v.config);
    if (proposal.gain > v.config->gain_threshold) {
        return {"Causal knowledge is incomplete; the best probe gains " + format_number(proposal.gain, 4) + " bits.",
                std::string(kCausalAction), v.config->refine_input, ""};
    }
    const auto plan = current_plan(k, *v.state, *v.instance, *v.config);
    if (plan.steps.empty()) return answer("No action improves the expected return.", "goal unreachable");
    return {"Knowledge is sufficient; follow the plan.", std::string(kCausalAction), "plan", ""};
}

ReActStep baseline_reasoner_step(const AgentView& v) {
    if (auto s = common_prefix(v)) return *s;
    const auto& k = *v.knowledge;
    const auto unknown = k.graph.unknown_edges();
    if (v.trace->oracle_queries() == 0 && !unknown.empty()) {
        return {"Ask the oracle about the first open causal link.", "AskOracle", "edge " + edge_text(unknown.front()),
                ""};
    }
    const auto plan = current_plan(k, *v.state, *v.instance, *v.config);
    if (plan.steps.empty()) return answer("No action improves the expected return.", "goal unreachable");
    return {"Take the next planned action.", "EnvAct", plan.steps.front(), ""};
}

ReActStep planner_reasoner_step(const AgentView& v) {
    if (auto s = common_prefix(v)) return *s;
    const auto plan = current_plan(*v.knowledge, *v.state, *v.instance, *v.config);
    if (plan.steps.empty()) return answer("No action improves the expected return.", "goal unreachable");
    return {"Take the next planned action.", "EnvAct", plan.steps.front(), ""};
}

std::string ScriptedReasoner::respond(const ReasonerRequest& request) {
    switch (kind_) {
    case AgentKind::Causal: return format_react_step(scripted_reasoner_step(request.view));
    case AgentKind::Baseline: return format_react_step(baseline_reasoner_step(request.view));
    case AgentKind::Planner:
    case AgentKind::Omniscient: return format_react_step(planner_reasoner_step(request.view));
    }
    return {};
}

ExternalReasoner::ExternalReasoner(std::string url, int timeout_seconds) : timeout_seconds_(timeout_seconds) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("reasoner url needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    scheme_host_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::unique_ptr<ExternalReasoner> ExternalReasoner::from_env() {
    const char* url = std::getenv("SCOOP_REASONER_URL");
    if (!url || !*url) throw Error("SCOOP_REASONER_URL is not set");
    return std::make_unique<ExternalReasoner>(url);
}

std::string ExternalReasoner::respond(const ReasonerRequest& request) {
    const std::string body = nlohmann::json{{"prompt", request.prompt}}.dump();
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(scheme_host_);
        client.set_connection_timeout(timeout_seconds_);
        client.set_read_timeout(timeout_seconds_);
        client.set_write_timeout(timeout_seconds_);
        auto res = client.Post(path_, body, "application/json");
        if (!res || res->status != 200) continue;
        try {
            return nlohmann::json::parse(res->body).at("text").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            return {};
        }
    }
    return {};
}

std::unique_ptr<Reasoner> make_reasoner(AgentKind kind, std::string_view which) {
    if (which == "scripted") return std::make_unique<ScriptedReasoner>(kind);
    if (which == "external") return ExternalReasoner::from_env();
    throw ParseError("reasoner", "expected scripted or external, got \"" + std::string(which) + "\"");
}

namespace {

void record_decision(EpisodeTrace& trace, int iteration, int t, const RefinementProposal& proposal,
                     const std::optional<InterventionOption>& option, const RefinementDecision& decision,
                     const AgentConfig& config, const HypothesisPosterior& posterior, const Values& observed) {
    DecisionRecord rec;
    rec.seq = trace.next_seq++;
    rec.iteration = iteration;
    rec.t = t;
    rec.gain_bits = proposal.gain;
    rec.chosen = decision_name(decision);
    if (option) rec.intervention_cost = option->cost;
    rec.oracle_cost = config.oracle_cost;
    if (const auto* i = std::get_if<Intervene>(&decision)) {
        rec.target = i->action.str();
        rec.splits = is_disambiguating(posterior, observed, i->action);
    } else if (const auto* q = std::get_if<AskOracle>(&decision)) {
        rec.target = to_string(q->query);
        rec.splits = is_disambiguating(posterior, observed, q->query);
    }
    trace.decisions.push_back(std::move(rec));
}

} // namespace

// Refinement and action ---------------------------------------------------------

std::string causal_refinement_and_action(std::string_view action_input, AgentKnowledge& knowledge,
                                         const AgentConfig& config, EpisodeEnv& env, int iteration) {
    try {
        bool want_refine = false;
        bool want_plan = false;
        std::string spec(trim(action_input));
        std::istringstream tokens(spec);
        for (std::string tok; std::getline(tokens, tok, '+');) {
            auto t = trim(tok);
            if (t == "refine") {
                want_refine = true;
            } else if (t == "plan") {
                want_plan = true;
            } else {
                return "error: unrecognized action input \"" + spec + "\"; use refine, plan or refine+plan";
            }
        }
        if (!want_refine && !want_plan) return "error: empty action input; use refine, plan or refine+plan";

        auto& trace = env.trace();
        const auto before = knowledge.graph;
        const auto support_before = knowledge.posterior.support.size();
        const double h_before = entropy(knowledge.posterior);
        std::vector<std::string> parts;

        if (want_refine || !knowledge.graph.unknown_edges().empty()) {
            int costly = 0;
            for (int round = 0; round < 32 && !env.terminal(); ++round) {
                const auto inst = planning_instance(env.instance(), knowledge);
                const auto& observed = env.state().values;
                auto proposal = estimate_refinement(knowledge.posterior, knowledge.graph, observed, inst, config);
                auto option = estimate_intervention_cost(proposal, observed, inst, config.opportunity_cost);
                auto decision = select_refinement(proposal, option, config);
                const bool free = (std::holds_alternative<Intervene>(decision) && option && option->cost == 0.0) ||
                                  (std::holds_alternative<AskOracle>(decision) && env.instance().oracle_query_cost == 0.0);
                if (!std::holds_alternative<NoRefinement>(decision) && !free && costly >= config.max_refinements_per_call) {
                    break;
                }

                record_decision(trace, iteration, env.state().t, proposal, option, decision, config, knowledge.posterior,
                                observed);

                if (std::holds_alternative<NoRefinement>(decision)) {
                    parts.push_back("refinement: no significant gain (" + format_number(proposal.gain, 4) + " bits).");
                    break;
                }
                if (const auto* i = std::get_if<Intervene>(&decision)) {
                    auto res = env.act(i->action, iteration);
                    knowledge.absorb(res);
                    parts.push_back("intervened with " + i->action.str() + ": " + res.outcome.observation.text);
                } else {
                    const auto query = formulate_query(proposal);
                    auto res = env.act(query, iteration);
                    knowledge.absorb(res);
                    parts.push_back("asked oracle \"" + to_string(query) + "\": " + res.outcome.observation.text);
                }
                if (!free) ++costly;
            }
        }

        if (want_plan && !env.terminal()) {
            auto plan = current_plan(knowledge, env.state(), env.instance(), config);
            trace.plans.push_back({trace.next_seq++, iteration, env.state().t, plan.steps, plan.expected_value});
            if (plan.steps.empty()) {
                parts.push_back("plan: no beneficial action.");
            } else {
                parts.push_back("plan: " + plan.steps.front() + (plan.steps.size() > 1 ? " (+" + std::to_string(plan.steps.size() - 1) + " more)" : "") +
                                ", expected value " + format_number(plan.expected_value, 4) + ".");
                const auto n = std::min<std::size_t>(plan.steps.size(), static_cast<std::size_t>(config.plan_steps_per_call));
                for (std::size_t k = 0; k < n && !env.terminal(); ++k) {
                    auto res = env.act(parse_action(plan.steps[k]), iteration);
                    knowledge.absorb(res);
                    parts.push_back("executed " + plan.steps[k] + ": " + res.outcome.observation.text);
                }
            }
        }

        std::vector<std::string> changed;
        for (const auto& [e, b] : knowledge.graph.edges) {
            auto it = before.edges.find(e);
            if (it != before.edges.end() && it->second.status != b.status) {
                changed.push_back(edge_text(e) + " " + std::string(to_string(b.status)));
            }
        }
        if (!changed.empty()) {
            std::string joined;
            for (const auto& c : changed) joined += (joined.empty() ? "" : ", ") + c;
            parts.push_back("graph: " + joined + ".");
        }
        if (knowledge.posterior.support.size() != support_before) {
            parts.push_back("hypotheses " + std::to_string(support_before) + " -> " +
                            std::to_string(knowledge.posterior.support.size()) + ", entropy " +
                            format_number(h_before, 4) + " -> " + format_number(entropy(knowledge.posterior), 4) +
                            " bits.");
        }
        std::string out;
        for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
        return out.empty() ? "nothing to do." : out;
    } catch (const std::exception& e) {
        return std::string("error: ") + e.what();
    }
}

// Episode loop ------------------------------------------------------------------

namespace {

std::string run_tool(const ReActStep& step, AgentKnowledge& knowledge, const AgentConfig& config, EpisodeEnv& env,
                     int iteration) {
    const auto& tool = step.action;
    if (tool == kCausalAction) return causal_refinement_and_action(step.action_input, knowledge, config, env, iteration);
    if (tool == "Observe") return render_observation_text(env.observe(), env.instance());
    if (tool != "AskOracle" && tool != "AskUser" && tool != "EnvAct") {
        return "UnknownAction: no tool named \"" + tool + "\"";
    }
    try {
        if (env.terminal()) return "error: the episode has ended";
        AgentAction action;
        if (tool == "AskOracle") {
            action = parse_oracle_query(step.action_input);
        } else if (tool == "AskUser") {
            action = parse_user_question(step.action_input);
        } else {
            action = parse_action(step.action_input);
        }
        auto res = env.act(action, iteration);
        knowledge.absorb(res);
        std::string text = res.outcome.observation.text;
        if (tool == "AskUser") {
            if (auto g = goal_from_text(text)) knowledge.goal = *g;
        } else if (tool == "EnvAct" && !res.outcome.rejected) {
            text = render_observation_text(res.outcome.observation, env.instance());
        }
        if (auto msg = env.take_user_message()) text += " user asks: " + *msg;
        return text;
    } catch (const std::exception& e) {
        return std::string("error: ") + e.what();
    }
}

} // namespace

EpisodeResult run_episode(const ProblemInstance& instance, const EpisodeContext& context, const AgentConfig& config,
                          Reasoner& reasoner, SocialActors& actors, AgentKnowledge& knowledge,
                          std::string_view agent_name) {
    EpisodeResult result;
    auto& trace = result.trace;
    trace.instance_id = instance.id;
    trace.true_hypothesis = instance.true_hypothesis;
    trace.agent = std::string(agent_name);
    knowledge.goal = goal_from_text(context.user_prompt);

    EpisodeEnv env(instance, actors, trace);
    ConversationMemory memory;
    memory.append("start. " + render_observation_text(env.observe(), instance));

    bool retried = false;
    for (int iteration = 0; iteration < config.max_steps; ++iteration) {
        bool satisfied = false;
        if (knowledge.goal) {
            if (auto g = instance.model->compile(knowledge.goal->all)) {
                satisfied = instance.model->holds(env.state().values, *g);
            }
        }
        const AgentView view{&instance, &knowledge, &env.state(), &config, &trace, satisfied, env.terminal()};
        const ReasonerRequest request{context, memory, build_prompt(context, memory), view};
        const auto raw = reasoner.respond(request);
        auto parsed = parse_react_step(raw);
        if (!parsed || (parsed->answer.empty() && parsed->action.empty())) {
            const std::string note = "malformed reply: expected Thought/Action/Action Input or Answer lines";
            trace.react.push_back({trace.next_seq++, iteration, "", "", "", "", note});
            if (retried) {
                result.failure = "malformed reasoner output";
                trace.outcome = "failed";
                return result;
            }
            retried = true;
            memory.append(note);
            continue;
        }
        retried = false;
        memory.append(*parsed);
        if (!parsed->answer.empty()) {
            trace.react.push_back({trace.next_seq++, iteration, parsed->thought, "", "", parsed->answer, ""});
            result.answered = true;
            result.answer = parsed->answer;
            trace.outcome = "answered";
            trace.answer = parsed->answer;
            return result;
        }
        const int seq = trace.next_seq++;
        auto observation = run_tool(*parsed, knowledge, config, env, iteration);
        trace.react.push_back(
            {seq, iteration, parsed->thought, parsed->action, parsed->action_input, "", observation});
        memory.append(std::move(observation));
    }
    result.failure = "iteration limit reached";
    trace.outcome = "failed";
    return result;
}

HypothesisPosterior free_exploration(const ProblemInstance& instance, double budget, SocialActors& actors,
                                     const AgentConfig& config, AgentKnowledge& knowledge, EpisodeTrace& trace) {
    if (budget <= 0.0) return knowledge.posterior;
    ProblemInstance inst = planning_instance(instance, knowledge);
    inst.id = "explore";
    inst.max_steps = 1 << 30;
    EpisodeEnv env(inst, actors, trace, true);
    double remaining = budget;
    for (int round = 0; round < 1000; ++round) {
        const auto& observed = env.state().values;
        auto proposal = estimate_refinement(knowledge.posterior, knowledge.graph, observed, inst, config);
        if (proposal.gain <= config.gain_threshold) break;
        auto option = estimate_intervention_cost(proposal, observed, inst, config.opportunity_cost);
        auto decision = select_refinement(proposal, option, config);
        if (std::holds_alternative<NoRefinement>(decision)) break;
        const bool intervene = std::holds_alternative<Intervene>(decision);
        const double cost = intervene ? std::abs(option->cost) : std::abs(inst.oracle_query_cost);
        if (cost > remaining) break;
        record_decision(trace, 0, env.state().t, proposal, option, decision, config, knowledge.posterior, observed);
        AgentAction action;
        if (intervene) {
            action = std::get<Intervene>(decision).action;
        } else {
            action = formulate_query(proposal);
        }
        knowledge.absorb(env.act(action, 0));
        remaining -= cost;
    }
    return knowledge.posterior;
}

Agent::Agent(AgentKind kind, AgentConfig config, std::string reasoner)
    : kind_(kind), config_(std::move(config)), reasoner_(make_reasoner(kind, reasoner)) {
    validate(config_);
}

void Agent::begin_instance(const ProblemInstance& instance) {
    const bool carry = kind_ == AgentKind::Causal && has_knowledge_ && instance.domain().persistent_rules &&
                       knowledge_.posterior.model == instance.model;
    if (kind_ == AgentKind::Omniscient) {
        knowledge_.posterior = point_posterior(instance.model, instance.true_index);
        knowledge_.graph = derive_graph(knowledge_.posterior);
    } else if (!carry) {
        auto [graph, posterior] = create_graph(instance.model);
        knowledge_.graph = std::move(graph);
        knowledge_.posterior = std::move(posterior);
    }
    knowledge_.goal.reset();
    has_knowledge_ = true;
}

EpisodeResult Agent::run(const ProblemInstance& instance, const EpisodeContext& context, SocialActors& actors) {
    if (!has_knowledge_) begin_instance(instance);
    return run_episode(instance, context, config_, *reasoner_, actors, knowledge_, to_string(kind_));
}

} // namespace scoop

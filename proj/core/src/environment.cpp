#include "scoop/environment.hpp"

#include "scoop/error.hpp"
#include "scoop/rng.hpp"

namespace scoop {

namespace {

Observation signal_observation(const Values& s, const ProblemInstance& inst, int t) {
    Observation o;
    o.kind = ObsKind::EnvSignal;
    o.readings = observable_readings(*inst.model, s);
    o.text = render_readings(*inst.model, o.readings);
    o.source = TextSource::Descriptor;
    o.step = t;
    return o;
}

} // namespace

std::optional<std::size_t> resolve_action(const GroundAction& action, const ProblemInstance& instance) {
    return instance.model->action_index(action.str());
}

std::pair<WorldState, Observation> reset(const ProblemInstance& instance) {
    WorldState s = instance.initial_state;
    s.t = 0;
    auto obs = signal_observation(s.values, instance, 0);
    return {s, obs};
}

Observation observe(const WorldState& state, const ProblemInstance& instance) {
    return signal_observation(state.values, instance, state.t);
}

std::pair<WorldState, StepOutcome> step(const WorldState& state, const AgentAction& agent, const UserAction& user,
                                        const ProblemInstance& instance, SocialActors& actors) {
    if (state.terminal) throw ContractViolation("step called on a terminal state");
    const auto& m = *instance.model;
    StepOutcome out;
    Values s = state.values;
    const int t = state.t;

    if (const auto* g = std::get_if<GroundAction>(&agent)) {
        if (auto a = resolve_action(*g, instance)) {
            out.cost_agent = m.action_cost(*a);
            auto tr = m.sample(s, *a, instance.true_index, keyed_u64({instance.seed, std::uint64_t(t), 0}));
            s = std::move(tr.next);
            out.blocked = tr.blocked;
            out.observation = signal_observation(s, instance, t);
        } else {
            out.rejected = true;
            out.observation.kind = ObsKind::Error;
            out.observation.text = "UnknownAction: " + g->str();
            out.observation.step = t;
        }
    } else if (const auto* q = std::get_if<OracleQuery>(&agent)) {
        auto answer = answer_oracle(*q, instance, &state, actors.oracle);
        out.cost_query = answer.cost_charged;
        out.observation.kind = ObsKind::OracleAnswer;
        out.observation.source = TextSource::Oracle;
        out.observation.text = answer.text;
        out.observation.readings = answer.readings;
        out.observation.answer = std::move(answer);
        out.observation.step = t;
    } else if (const auto* u = std::get_if<UserQuestion>(&agent)) {
        out.observation = answer_user(*u, actors.user, instance);
        out.observation.step = t;
        out.cost_query = instance.user_query_cost;
    } else {
        out.observation = signal_observation(s, instance, t);
    }

    if (const auto* g = std::get_if<GroundAction>(&user)) {
        if (auto a = resolve_action(*g, instance)) {
            s = m.sample(s, *a, instance.true_index, keyed_u64({instance.seed, std::uint64_t(t), 1})).next;
        }
    } else if (const auto* q = std::get_if<AgentQuestion>(&user)) {
        out.user_message = q->text;
    }

    WorldState next;
    next.values = std::move(s);
    next.t = t + 1;
    const bool goal = instance.goal_holds(next.values);
    next.terminal = goal || next.t >= instance.max_steps;
    out.reward_user = goal ? instance.goal_reward : 0.0;
    out.signal = observable_readings(m, next.values);
    out.next_state_digest = m.digest(next.values);
    return {std::move(next), std::move(out)};
}

std::string render_observation_text(const Observation& obs, const ProblemInstance& instance) {
    if (obs.kind == ObsKind::EnvSignal) return render_readings(*instance.model, obs.readings);
    return obs.text;
}

nlohmann::json to_json(const Observation& obs, const Model& model) {
    nlohmann::json j;
    j["kind"] = to_string(obs.kind);
    j["step"] = obs.step;
    j["source"] = to_string(obs.source);
    j["text"] = obs.text;
    auto readings = nlohmann::json::array();
    for (const auto& r : obs.readings) {
        readings.push_back({model.features()[r.feature].label, model.value_name(r.feature, r.value)});
    }
    j["readings"] = std::move(readings);
    if (obs.answer) {
        const auto& a = *obs.answer;
        nlohmann::json aj{{"variant", to_string(a.kind)},
                          {"text", a.text},
                          {"truthful", a.truthful},
                          {"cost_charged", a.cost_charged}};
        if (a.chunk) {
            aj["cause"] = a.chunk->edge.first;
            aj["effect"] = a.chunk->edge.second;
            aj["rule"] = a.chunk->rule_id;
            aj["causes"] = a.chunk->causes;
            aj["probability"] = a.chunk->probability;
        }
        auto ar = nlohmann::json::array();
        for (const auto& r : a.readings) {
            ar.push_back({model.features()[r.feature].label, model.value_name(r.feature, r.value)});
        }
        aj["readings"] = std::move(ar);
        j["answer"] = std::move(aj);
    }
    return j;
}

namespace {

template <class E>
E enum_from(std::string_view s, std::initializer_list<E> all) {
    for (auto e : all) {
        if (to_string(e) == s) return e;
    }
    throw ParseError("observation", "unknown tag \"" + std::string(s) + "\"");
}

std::vector<Reading> readings_from(const nlohmann::json& arr, const Model& model) {
    std::vector<Reading> out;
    for (const auto& r : arr) {
        auto label = r.at(0).get<std::string>();
        auto f = model.feature_index(label);
        if (!f) throw ParseError("observation", "unknown feature \"" + label + "\"");
        auto v = model.value_index(*f, r.at(1).get<std::string>());
        if (!v) throw ParseError("observation", "bad value for \"" + label + "\"");
        out.push_back({*f, *v});
    }
    return out;
}

} // namespace

Observation observation_from_json(const nlohmann::json& j, const Model& model) {
    try {
        Observation o;
        o.kind = enum_from(j.at("kind").get<std::string>(),
                           {ObsKind::EnvSignal, ObsKind::LanguageText, ObsKind::OracleAnswer, ObsKind::Error});
        o.step = j.at("step").get<int>();
        o.source = enum_from(j.at("source").get<std::string>(),
                             {TextSource::Descriptor, TextSource::User, TextSource::Oracle});
        o.text = j.at("text").get<std::string>();
        o.readings = readings_from(j.at("readings"), model);
        if (j.contains("answer")) {
            const auto& aj = j["answer"];
            OracleAnswer a;
            a.kind = enum_from(aj.at("variant").get<std::string>(), {AnswerKind::Language, AnswerKind::Chunk,
                                                                      AnswerKind::ObsFeedback, AnswerKind::CannotAnswer});
            a.text = aj.at("text").get<std::string>();
            a.truthful = aj.at("truthful").get<bool>();
            a.cost_charged = aj.at("cost_charged").get<double>();
            if (aj.contains("causes")) {
                CausalChunk c;
                c.edge = {aj.at("cause").get<std::string>(), aj.at("effect").get<std::string>()};
                c.rule_id = aj.at("rule").get<std::string>();
                c.causes = aj.at("causes").get<bool>();
                c.probability = aj.at("probability").get<double>();
                a.chunk = c;
            }
            a.readings = readings_from(aj.at("readings"), model);
            o.answer = std::move(a);
        }
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("observation", e.what());
    }
}

} // namespace scoop

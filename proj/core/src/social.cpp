#include "scoop/social.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "scoop/format.hpp"
#include "scoop/rng.hpp"

namespace scoop {

namespace {

bool is_node(const Model& m, const std::string& s) {
    if (m.feature_index(s) || m.action_index(s)) return true;
    for (const auto& [c, e] : m.edges()) {
        if (c == s || e == s) return true;
    }
    return false;
}

OracleAnswer cannot_answer(const std::string& symbol, double cost) {
    OracleAnswer a;
    a.kind = AnswerKind::CannotAnswer;
    a.text = "cannot answer: unknown symbol " + symbol;
    a.cost_charged = cost;
    return a;
}

void apply_noise(OracleAnswer& a, const OracleQuery& q, const ProblemInstance& inst, const OracleConfig& cfg) {
    if (cfg.epsilon <= 0.0 || !a.chunk) return;
    if (keyed_uniform({cfg.noise_seed, inst.seed, fnv1a64(to_string(q))}) < cfg.epsilon) {
        a.chunk->causes = !a.chunk->causes;
        a.truthful = false;
    }
}

std::string chunk_text(const CausalChunk& c) {
    if (!c.rule_id.empty()) {
        return c.causes ? "rule " + c.rule_id + " holds (p=" + format_number(c.probability) + ")."
                        : "rule " + c.rule_id + " does not hold.";
    }
    return c.causes ? c.edge.first + " causes " + c.edge.second + " (p=" + format_number(c.probability) + ")."
                    : c.edge.first + " does not cause " + c.edge.second + ".";
}

} // namespace

const std::vector<std::string>& user_policies() {
    static const std::vector<std::string> ids{"greedy-goal", "human", "passive", "prompter"};
    return ids;
}

UserProfile make_profile(const ProblemInstance& instance, std::string policy, int patience) {
    if (std::find(user_policies().begin(), user_policies().end(), policy) == user_policies().end()) {
        throw ValidationError("unknown user policy \"" + policy + "\"");
    }
    if (patience < 0) throw ValidationError("patience must be non-negative");
    UserProfile p;
    p.goal = instance.user_goal;
    p.policy = std::move(policy);
    p.patience = patience;
    return p;
}

OracleAnswer answer_oracle(const OracleQuery& query, const ProblemInstance& instance, const WorldState* current,
                           const OracleConfig& config) {
    const auto& m = *instance.model;
    const auto& truth = m.hypotheses()[instance.true_index];
    const double beta = instance.oracle_query_cost;

    OracleAnswer a;
    a.cost_charged = beta;
    if (const auto* e = std::get_if<EdgeQuery>(&query)) {
        if (!is_node(m, e->cause)) return cannot_answer(e->cause, beta);
        if (!is_node(m, e->effect)) return cannot_answer(e->effect, beta);
        CausalChunk c;
        c.edge = {e->cause, e->effect};
        if (auto it = truth.edges.find(c.edge); it != truth.edges.end()) {
            c.causes = true;
            c.probability = it->second;
        }
        a.kind = AnswerKind::Chunk;
        a.chunk = c;
    } else if (const auto* r = std::get_if<RuleQuery>(&query)) {
        auto rule = std::find_if(m.rules().begin(), m.rules().end(), [&](const auto& x) { return x.id == r->rule_id; });
        if (rule == m.rules().end()) return cannot_answer(r->rule_id, beta);
        const auto ri = static_cast<std::size_t>(rule - m.rules().begin());
        CausalChunk c;
        c.rule_id = rule->id;
        if (!rule->edges.empty()) c.edge = rule->edges.front();
        c.causes = std::binary_search(truth.rules.begin(), truth.rules.end(), ri);
        c.probability = c.causes ? rule->probability : 0.0;
        a.kind = AnswerKind::Chunk;
        a.chunk = c;
    } else if (const auto* s = std::get_if<StateQuery>(&query)) {
        auto f = m.feature_index(s->feature);
        if (!f) return cannot_answer(s->feature, beta);
        const auto& values = current ? current->values : instance.initial_state.values;
        a.kind = AnswerKind::ObsFeedback;
        a.readings = {{*f, values[*f]}};
        a.text = render_readings(m, a.readings);
    } else {
        const auto& q = std::get<MechanismQuery>(query);
        const auto& spec = m.spec();
        auto mech = std::find_if(spec.mechanisms.begin(), spec.mechanisms.end(),
                                 [&](const auto& x) { return x.id == q.mechanism; });
        if (mech == spec.mechanisms.end()) return cannot_answer(q.mechanism, beta);
        if (q.args.size() != mech->param_types.size()) return cannot_answer(to_string(query), beta);
        std::vector<std::string> shown;
        for (std::size_t i = 0; i < q.args.size(); ++i) {
            auto obj = m.objects().find(q.args[i]);
            if (obj == m.objects().end() || obj->second != mech->param_types[i]) return cannot_answer(q.args[i], beta);
            shown.push_back(display_name(q.args[i]));
        }
        const Edge edge{expand_template(mech->cause, q.args), expand_template(mech->effect, q.args)};
        const bool present = truth.edges.count(edge) > 0;
        a.kind = AnswerKind::Language;
        a.text = expand_template(present ? mech->positive : mech->negative, shown);
        apply_noise(a, query, instance, config);
        return a;
    }
    apply_noise(a, query, instance, config);
    if (a.chunk) a.text = chunk_text(*a.chunk);
    return a;
}

Observation answer_user(const UserQuestion& question, UserProfile& profile, const ProblemInstance&) {
    Observation o;
    o.kind = ObsKind::LanguageText;
    o.source = TextSource::User;
    if (profile.patience <= 0) {
        o.text = "no answer";
        return o;
    }
    --profile.patience;
    if (profile.human && profile.human->in) {
        if (profile.human->out) *profile.human->out << "agent asks: " << to_string(question) << "\n> " << std::flush;
        std::string line;
        std::getline(*profile.human->in, line);
        o.text = line.empty() ? "no answer" : line;
        return o;
    }
    if (question.kind == UserQuestion::Kind::Goal) {
        o.text = "goal: " + profile.goal.str();
    } else {
        auto it = profile.preference_weights.find(question.feature);
        o.text = "preference " + question.feature + " = " +
                 format_number(it == profile.preference_weights.end() ? 0.0 : it->second);
    }
    return o;
}

UserAction user_act(const WorldState& state, UserProfile& profile, const ProblemInstance& instance) {
    const auto& m = *instance.model;
    if (profile.policy == "passive") return NoOp{};
    if (profile.policy == "prompter") {
        if (profile.prompter_k > 0 && state.t > 0 && state.t % profile.prompter_k == 0) {
            return AgentQuestion{"is there anything you need from me?"};
        }
        return NoOp{};
    }
    if (profile.policy == "greedy-goal") {
        if (instance.goal_holds(state.values)) return NoOp{};
        double best = 0.0;
        std::optional<std::size_t> pick;
        for (std::size_t a = 0; a < m.actions().size(); ++a) {
            double p = 0.0;
            for (const auto& t : m.successors(state.values, a, instance.true_index)) {
                if (instance.goal_holds(t.next)) p += t.probability;
            }
            if (p > best + 1e-12) {
                best = p;
                pick = a;
            }
        }
        if (pick) return m.actions()[*pick];
        return NoOp{};
    }
    // human
    if (!profile.human || !profile.human->in) return NoOp{};
    if (profile.human->out) *profile.human->out << "your action (noop | ask <text> | action): " << std::flush;
    std::string line;
    if (!std::getline(*profile.human->in, line)) return NoOp{};
    std::string_view s = line;
    while (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    if (s.empty() || s == "noop") return NoOp{};
    if (s.substr(0, 4) == "ask ") return AgentQuestion{std::string(s.substr(4))};
    try {
        return parse_action(s);
    } catch (const ParseError& e) {
        if (profile.human->out) *profile.human->out << e.what() << " (treated as noop)\n";
        return NoOp{};
    }
}

} // namespace scoop

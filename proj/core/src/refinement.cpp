#include "scoop/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scoop/error.hpp"

namespace scoop {

namespace {

constexpr double kGainEps = 1e-12;

bool hyp_has_rule(const Model& m, std::size_t h, std::size_t rule) {
    const auto& rules = m.hypotheses()[h].rules;
    return std::binary_search(rules.begin(), rules.end(), rule);
}

std::vector<double> one_hot(std::size_t n, std::size_t i) {
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    return v;
}

/// Posterior after outcome o, or nullopt when o has zero predictive mass.
std::optional<HypothesisPosterior> condition(const HypothesisPosterior& post,
                                             const std::vector<std::vector<double>>& outcomes, std::size_t o) {
    HypothesisPosterior out;
    out.model = post.model;
    double total = 0.0;
    for (std::size_t i = 0; i < post.support.size(); ++i) {
        const double w = post.probs[i] * outcomes[i][o];
        if (w <= 0.0) continue;
        out.support.push_back(post.support[i]);
        out.probs.push_back(w);
        total += w;
    }
    if (total <= 0.0) return std::nullopt;
    for (auto& p : out.probs) p /= total;
    return out;
}

double planned_value(const HypothesisPosterior& post, const Values& observed, const ProblemInstance& inst,
                     PlanMode mode) {
    std::optional<int> horizon;
    if (inst.gamma >= 1.0) horizon = inst.max_steps;
    auto mdp = induce_mdp(post, observed, inst, mode, horizon);
    return value_iterate(mdp).values[mdp.start];
}

double value_gain(const HypothesisPosterior& post, const std::vector<std::vector<double>>& outcomes,
                  const Values& observed, const ProblemInstance& inst, PlanMode mode) {
    const double base = planned_value(post, observed, inst, mode);
    const std::size_t n_out = outcomes.empty() ? 0 : outcomes.front().size();
    double expected = 0.0;
    for (std::size_t o = 0; o < n_out; ++o) {
        double po = 0.0;
        for (std::size_t i = 0; i < post.support.size(); ++i) po += post.probs[i] * outcomes[i][o];
        if (po <= 0.0) continue;
        if (auto c = condition(post, outcomes, o)) expected += po * planned_value(*c, observed, inst, mode);
    }
    return std::max(0.0, expected - base);
}

} // namespace

void validate(const AgentConfig& c) {
    if (c.oracle_cost < 0 || c.budget < 0 || c.gain_threshold < 0 || c.opportunity_cost < 0) {
        throw ValidationError("agent config values must be non-negative");
    }
    if (c.max_steps < 1 || c.voi_horizon < 1 || c.plan_steps_per_call < 0 || c.max_refinements_per_call < 0) {
        throw ValidationError("agent config step counts out of range");
    }
    if (c.refine_input != "refine" && c.refine_input != "refine+plan") {
        throw ValidationError("refine_input must be \"refine\" or \"refine+plan\"");
    }
}

nlohmann::json to_json(const AgentConfig& c) {
    return {{"oracle_cost", c.oracle_cost},
            {"budget", c.budget},
            {"gain_threshold", c.gain_threshold},
            {"max_steps", c.max_steps},
            {"voi_horizon", c.voi_horizon},
            {"opportunity_cost", c.opportunity_cost},
            {"value_voi", c.value_voi},
            {"plan_mode", to_string(c.plan_mode)},
            {"plan_steps_per_call", c.plan_steps_per_call},
            {"max_refinements_per_call", c.max_refinements_per_call},
            {"refine_input", c.refine_input}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
    AgentConfig c;
    try {
        c.oracle_cost = j.value("oracle_cost", c.oracle_cost);
        c.budget = j.value("budget", c.budget);
        c.gain_threshold = j.value("gain_threshold", c.gain_threshold);
        c.max_steps = j.value("max_steps", c.max_steps);
        c.voi_horizon = j.value("voi_horizon", c.voi_horizon);
        c.opportunity_cost = j.value("opportunity_cost", c.opportunity_cost);
        c.value_voi = j.value("value_voi", c.value_voi);
        c.plan_mode = parse_plan_mode(j.value("plan_mode", std::string(to_string(c.plan_mode))));
        c.plan_steps_per_call = j.value("plan_steps_per_call", c.plan_steps_per_call);
        c.max_refinements_per_call = j.value("max_refinements_per_call", c.max_refinements_per_call);
        c.refine_input = j.value("refine_input", c.refine_input);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("agent config", e.what());
    }
    validate(c);
    return c;
}

double expected_entropy_reduction(const std::vector<double>& probs,
                                  const std::vector<std::vector<double>>& outcome_probs) {
    const double h0 = entropy_bits(probs);
    if (probs.empty()) return 0.0;
    const std::size_t n_out = outcome_probs.front().size();
    double expected = 0.0;
    for (std::size_t o = 0; o < n_out; ++o) {
        std::vector<double> joint(probs.size());
        double po = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            joint[i] = probs[i] * outcome_probs[i][o];
            po += joint[i];
        }
        if (po <= 0.0) continue;
        for (auto& x : joint) x /= po;
        expected += po * entropy_bits(joint);
    }
    return std::clamp(h0 - expected, 0.0, h0);
}

std::vector<std::vector<double>> query_outcomes(const HypothesisPosterior& post, const OracleQuery& query) {
    const auto& m = *post.model;
    std::vector<std::vector<double>> out;
    for (auto h : post.support) {
        if (const auto* e = std::get_if<EdgeQuery>(&query)) {
            out.push_back(one_hot(2, m.hypotheses()[h].edges.count({e->cause, e->effect}) ? 1 : 0));
        } else if (const auto* r = std::get_if<RuleQuery>(&query)) {
            bool present = false;
            for (auto ri : m.hypotheses()[h].rules) present = present || m.rules()[ri].id == r->rule_id;
            out.push_back(one_hot(2, present ? 1 : 0));
        } else if (const auto* s = std::get_if<StateQuery>(&query)) {
            auto f = m.feature_index(s->feature);
            if (!f || m.observable(*f)) {
                out.push_back({1.0});
            } else {
                const Values v = m.with_hidden(m.initial_values(), h);
                out.push_back(one_hot(m.decl(*f).values.size(), v[*f]));
            }
        } else {
            out.push_back({1.0});
        }
    }
    return out;
}

std::vector<std::vector<double>> intervention_outcomes(const HypothesisPosterior& post, const Values& observed,
                                                       std::size_t action) {
    const auto& m = *post.model;
    const Values base = m.project(observed);
    std::map<Values, std::size_t> index;
    std::vector<std::map<std::size_t, double>> rows;
    for (auto h : post.support) {
        std::map<std::size_t, double> row;
        for (const auto& t : m.successors(m.with_hidden(base, h), action, h)) {
            auto [it, _] = index.try_emplace(m.project(t.next), index.size());
            row[it->second] += t.probability;
        }
        rows.push_back(std::move(row));
    }
    std::vector<std::vector<double>> out(rows.size(), std::vector<double>(index.size(), 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& [o, p] : rows[i]) out[i][o] = p;
    }
    return out;
}

RefinementProposal estimate_refinement(const HypothesisPosterior& posterior, const CausalGraph& graph,
                                       const Values& observed, const ProblemInstance& instance,
                                       const AgentConfig& config) {
    const auto& m = *posterior.model;
    RefinementProposal p;
    p.target_edges = graph.unknown_edges();
    if (posterior.support.size() < 2) return p;

    auto score = [&](const std::vector<std::vector<double>>& outcomes) {
        return config.value_voi ? value_gain(posterior, outcomes, observed, instance, config.plan_mode)
                                : expected_entropy_reduction(posterior.probs, outcomes);
    };

    std::vector<OracleQuery> candidates;
    for (const auto& [c, e] : p.target_edges) candidates.push_back(EdgeQuery{c, e});
    for (std::size_t r = 0; r < m.rules().size(); ++r) {
        if (m.rules()[r].known) continue;
        double mass = 0.0;
        for (std::size_t i = 0; i < posterior.support.size(); ++i) {
            if (hyp_has_rule(m, posterior.support[i], r)) mass += posterior.probs[i];
        }
        if (mass > kStatusTolerance && mass < 1.0 - kStatusTolerance) candidates.push_back(RuleQuery{m.rules()[r].id});
    }
    for (auto f : m.hidden_features()) {
        const StateQuery q{m.features()[f].label};
        const auto outcomes = query_outcomes(posterior, q);
        std::vector<double> marg(outcomes.front().size(), 0.0);
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            for (std::size_t o = 0; o < marg.size(); ++o) marg[o] += posterior.probs[i] * outcomes[i][o];
        }
        if (*std::max_element(marg.begin(), marg.end()) < 1.0 - kStatusTolerance) candidates.push_back(q);
    }

    for (auto& q : candidates) {
        const double g = score(query_outcomes(posterior, q));
        p.queries.push_back({q, g});
        if (!p.best_query || g > p.gain + kGainEps) {
            p.best_query = q;
            p.gain = g;
        }
    }

    for (std::size_t a = 0; a < m.actions().size(); ++a) {
        const double g = score(intervention_outcomes(posterior, observed, a));
        if (g <= kGainEps) continue;
        InterventionOption opt{m.actions()[a], std::abs(m.action_cost(a)), g};
        if (!p.best_intervention || g > p.best_intervention->expected_gain + kGainEps) p.best_intervention = opt;
        p.interventions.push_back(std::move(opt));
    }
    return p;
}

std::optional<InterventionOption> estimate_intervention_cost(const RefinementProposal& proposal, const Values&,
                                                             const ProblemInstance& instance, double opportunity) {
    if (!proposal.best_intervention) return std::nullopt;
    auto opt = *proposal.best_intervention;
    auto a = instance.model->action_index(opt.action.str());
    if (!a) return std::nullopt;
    opt.cost = std::abs(instance.model->action_cost(*a)) + opportunity;
    return opt;
}

std::string decision_name(const RefinementDecision& d) {
    if (std::holds_alternative<Intervene>(d)) return "intervene";
    if (std::holds_alternative<AskOracle>(d)) return "ask_oracle";
    return "no_refinement";
}

RefinementDecision select_refinement(const RefinementProposal& proposal, const std::optional<InterventionOption>& option,
                                     const AgentConfig& config) {
    if (!(proposal.gain > config.gain_threshold)) return NoRefinement{};
    if (option) {
        const bool cheaper = config.value_voi
                                 ? option->cost * proposal.gain < config.oracle_cost * option->expected_gain
                                 : option->cost < config.oracle_cost;
        if (cheaper) return Intervene{option->action};
    }
    if (!proposal.best_query) return NoRefinement{};
    return AskOracle{*proposal.best_query};
}

bool is_disambiguating(const HypothesisPosterior& posterior, const Values& observed, const AgentAction& action) {
    std::vector<std::vector<double>> outcomes;
    if (const auto* g = std::get_if<GroundAction>(&action)) {
        auto a = posterior.model->action_index(g->str());
        if (!a) return false;
        outcomes = intervention_outcomes(posterior, observed, *a);
    } else if (const auto* q = std::get_if<OracleQuery>(&action)) {
        if (const auto* mq = std::get_if<MechanismQuery>(q)) {
            const auto& mechs = posterior.model->spec().mechanisms;
            auto it = std::find_if(mechs.begin(), mechs.end(), [&](const auto& x) { return x.id == mq->mechanism; });
            if (it == mechs.end() || it->param_types.size() != mq->args.size()) return false;
            outcomes = query_outcomes(posterior, EdgeQuery{expand_template(it->cause, mq->args),
                                                           expand_template(it->effect, mq->args)});
        } else {
            outcomes = query_outcomes(posterior, *q);
        }
    } else {
        return false;
    }
    if (outcomes.empty()) return false;
    int live = 0;
    for (std::size_t o = 0; o < outcomes.front().size(); ++o) {
        double mass = 0.0;
        for (std::size_t i = 0; i < outcomes.size(); ++i) mass += posterior.probs[i] * outcomes[i][o];
        if (mass > kStatusTolerance) ++live;
    }
    return live >= 2;
}

OracleQuery formulate_query(const RefinementProposal& proposal) {
    if (!proposal.best_query) throw InferenceError("formulate_query on an empty proposal");
    return *proposal.best_query;
}

} // namespace scoop

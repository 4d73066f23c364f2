#include "scoop/instance.hpp"

#include <random>

#include "scoop/error.hpp"
#include "scoop/rng.hpp"

namespace scoop {

namespace {

template <class Weights>
std::size_t categorical(std::mt19937_64& rng, const Weights& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = to_unit(rng()) * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        last_positive = i;
        acc += weights[i];
        if (u < acc) return i;
    }
    return last_positive;
}

void require_valid(const DomainSpec& spec) {
    auto report = validate_domain(spec);
    if (!report.ok()) throw ValidationError("invalid domain:\n" + report.str());
}

} // namespace

ProblemInstance ground_instance(std::shared_ptr<const DomainSpec> spec,
                                const std::map<std::string, std::string>& objects,
                                const std::string& hypothesis, const Goal& goal, std::uint64_t seed) {
    require_valid(*spec);
    if (objects.empty()) throw ValidationError("vacuous instance: no objects");
    return ground_instance(Model::build(std::move(spec), objects), hypothesis, goal, seed);
}

ProblemInstance ground_instance(std::shared_ptr<const Model> model, const std::string& hypothesis,
                                const Goal& goal, std::uint64_t seed) {
    const auto& spec = model->spec();
    auto prior = spec.rule_prior.find(hypothesis);
    if (prior == spec.rule_prior.end() || prior->second <= 0.0) {
        throw ValidationError("hypothesis \"" + hypothesis + "\" not in prior support");
    }
    auto hi = model->hypothesis_index(hypothesis);
    if (!hi) throw ValidationError("hypothesis \"" + hypothesis + "\" not declared");

    if (goal.all.empty()) throw ValidationError("vacuous instance: empty goal");
    auto goal_assigns = model->compile(goal.all);
    if (!goal_assigns) throw ValidationError("vacuous instance: goal references absent objects or features");
    for (const auto& a : *goal_assigns) {
        if (!model->observable(a.feature)) throw ValidationError("goal references hidden feature");
    }
    const bool satisfiable = model->find_admissible([&](const Values& s) { return model->holds(s, *goal_assigns); });
    if (!satisfiable) throw ValidationError("vacuous instance: goal unsatisfiable in admissible worlds");

    ProblemInstance inst;
    inst.id = "theta";
    inst.model = model;
    inst.initial_state.values = model->with_hidden(model->initial_values(), *hi);
    if (!model->admissible(inst.initial_state.values)) {
        throw ValidationError("initial state violates world constraints");
    }
    inst.true_hypothesis = hypothesis;
    inst.true_index = *hi;
    inst.user_goal = goal;
    inst.goal_assigns = std::move(*goal_assigns);
    inst.goal_reward = spec.defaults.goal_reward;
    inst.oracle_query_cost = spec.defaults.oracle_query_cost;
    inst.user_query_cost = spec.defaults.user_query_cost;
    inst.gamma = spec.defaults.gamma;
    inst.max_steps = spec.defaults.max_steps;
    inst.seed = seed;
    inst.initial_state.terminal = inst.goal_holds(inst.initial_state.values);
    return inst;
}

std::vector<ProblemInstance> sample_session(const SessionSpec& session) {
    if (!session.domain) throw ValidationError("session has no domain");
    if (session.instance_count < 1) throw ValidationError("instance_count must be at least 1");
    if (!(session.shared_gamma > 0.0 && session.shared_gamma <= 1.0)) {
        throw ValidationError("shared_gamma outside (0,1]");
    }
    const auto& spec = *session.domain;
    require_valid(spec);
    if (spec.goals.empty()) throw ValidationError("domain declares no goals");

    auto model = Model::build(session.domain, spec.objects);
    std::vector<std::string> ids;
    std::vector<double> prior;
    for (const auto& [id, p] : spec.rule_prior) {
        ids.push_back(id);
        prior.push_back(p);
    }
    std::vector<double> goal_weights;
    for (const auto& g : spec.goals) goal_weights.push_back(g.weight);

    std::mt19937_64 rng(session.seed);
    std::string persistent;
    if (spec.persistent_rules) persistent = ids[categorical(rng, prior)];

    std::vector<ProblemInstance> out;
    out.reserve(static_cast<std::size_t>(session.instance_count));
    for (int i = 0; i < session.instance_count; ++i) {
        const auto& hyp = spec.persistent_rules ? persistent : ids[categorical(rng, prior)];
        const auto& goal = spec.goals[categorical(rng, goal_weights)].goal;
        const std::uint64_t seed = rng();
        auto inst = ground_instance(model, hyp, goal, seed);
        inst.id = "theta-" + std::to_string(i);
        inst.gamma = session.shared_gamma;
        out.push_back(std::move(inst));
    }
    return out;
}

nlohmann::json to_json(const SessionSpec& spec) {
    return {{"domain", spec.domain ? to_json(*spec.domain) : nlohmann::json(nullptr)},
            {"instance_count", spec.instance_count},
            {"seed", spec.seed},
            {"shared_gamma", spec.shared_gamma}};
}

SessionSpec session_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    SessionSpec s;
    try {
        const auto& d = j.at("domain");
        if (d.is_string()) {
            s.domain = std::make_shared<const DomainSpec>(load_domain(base_dir / d.get<std::string>()));
        } else {
            s.domain = std::make_shared<const DomainSpec>(domain_from_json(d));
        }
        s.instance_count = j.value("instance_count", 1);
        s.seed = j.value("seed", std::uint64_t{0});
        s.shared_gamma = j.value("shared_gamma", s.domain->defaults.gamma);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("session", e.what());
    }
    return s;
}

} // namespace scoop

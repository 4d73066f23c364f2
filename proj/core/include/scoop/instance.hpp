#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoop/domain.hpp"
#include "scoop/model.hpp"

namespace scoop {

struct WorldState {
    Values values;
    int t = 0;
    bool terminal = false;
    bool operator==(const WorldState&) const = default;
};

/// One grounded task θ. Rewards: r^u pays `goal_reward` on the step whose outcome satisfies
/// the goal; r^a is the per-action cost declared by the domain; β is charged per query.
struct ProblemInstance {
    std::string id;
    std::shared_ptr<const Model> model;
    WorldState initial_state;
    std::string true_hypothesis;
    std::size_t true_index = 0;
    Goal user_goal;
    std::vector<Assign> goal_assigns;
    double goal_reward = 1.0;
    double oracle_query_cost = -0.5;
    double user_query_cost = -0.5;
    double gamma = 0.95;
    int max_steps = 20;
    std::uint64_t seed = 0;

    const DomainSpec& domain() const { return model->spec(); }
    bool goal_holds(const Values& s) const { return model->holds(s, goal_assigns); }
};

/// Grounds `spec` over `objects`. Throws ValidationError("vacuous instance") when the goal
/// cannot hold in any admissible world of the grounding.
ProblemInstance ground_instance(std::shared_ptr<const DomainSpec> spec,
                                const std::map<std::string, std::string>& objects,
                                const std::string& hypothesis, const Goal& goal, std::uint64_t seed);
ProblemInstance ground_instance(std::shared_ptr<const Model> model, const std::string& hypothesis,
                                const Goal& goal, std::uint64_t seed);

struct SessionSpec {
    std::shared_ptr<const DomainSpec> domain;
    int instance_count = 1;
    std::uint64_t seed = 0;
    double shared_gamma = 0.95;
};

/// Deterministic in (spec, seed). Persistent-rule domains draw the true hypothesis once.
std::vector<ProblemInstance> sample_session(const SessionSpec& spec);

nlohmann::json to_json(const SessionSpec& spec);
/// `domain` may be inline or a path relative to `base_dir`.
SessionSpec session_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

} // namespace scoop

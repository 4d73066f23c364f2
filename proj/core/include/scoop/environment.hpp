#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoop/actions.hpp"
#include "scoop/instance.hpp"
#include "scoop/social.hpp"

namespace scoop {

struct StepOutcome {
    Observation observation;          ///< response to the agent action
    std::vector<Reading> signal;      ///< observable readings after the full step
    std::optional<std::string> user_message; ///< user's question to the agent, if any
    double reward_user = 0.0;
    double cost_agent = 0.0;
    double cost_query = 0.0;
    std::uint64_t next_state_digest = 0;
    bool blocked = false;   ///< agent action violated world constraints and had no effect
    bool rejected = false;  ///< agent action did not type-check
};

std::pair<WorldState, Observation> reset(const ProblemInstance& instance);

/// Agent action, world update, then user action; t advances by one. Query actions advance t
/// and charge β but trigger no rules. Throws ContractViolation on a terminal state.
std::pair<WorldState, StepOutcome> step(const WorldState& state, const AgentAction& agent, const UserAction& user,
                                        const ProblemInstance& instance, SocialActors& actors);

Observation observe(const WorldState& state, const ProblemInstance& instance);

std::string render_observation_text(const Observation& obs, const ProblemInstance& instance);

/// Resolves a ground action against the instance; nullopt when it does not type-check.
std::optional<std::size_t> resolve_action(const GroundAction& action, const ProblemInstance& instance);

nlohmann::json to_json(const Observation& obs, const Model& model);
Observation observation_from_json(const nlohmann::json& j, const Model& model);

} // namespace scoop

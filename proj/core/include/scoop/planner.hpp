#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scoop/instance.hpp"
#include "scoop/knowledge.hpp"

namespace scoop {

inline constexpr std::size_t kDefaultStateCap = 100000;
inline constexpr double kTieTolerance = 1e-6;

enum class PlanMode { Map, Expected };
std::string_view to_string(PlanMode m);
PlanMode parse_plan_mode(std::string_view s);

struct MdpTransition {
    std::size_t next = 0;
    double probability = 0.0;
    double reward = 0.0;
};

/// Finite MDP. Actions are shared by every state and kept in lexicographic name order, which
/// is also the tie-break order. Absorbing states have value 0 and no choices.
struct InducedMDP {
    std::vector<Values> states; ///< observable projections; empty for hand-built MDPs
    std::vector<std::string> actions;
    std::vector<std::vector<std::vector<MdpTransition>>> transitions; ///< [state][action]
    std::vector<bool> absorbing;
    std::vector<bool> goal;
    double gamma = 0.95;
    std::optional<int> horizon;
    std::size_t start = 0;

    std::size_t size() const { return transitions.size(); }
};

/// Posterior-weighted (Expected) or MAP transitions over observable states reachable from
/// `observed`. Rewards are r^a(a) plus goal_reward on entering a goal state; goal states absorb.
/// Throws InferenceError("state explosion") beyond `state_cap`.
InducedMDP induce_mdp(const HypothesisPosterior& posterior, const Values& observed, const ProblemInstance& instance,
                      PlanMode mode = PlanMode::Expected, std::optional<int> horizon = std::nullopt,
                      std::size_t state_cap = kDefaultStateCap);

struct ValueFunction {
    std::vector<double> values;
    /// Finite horizon only: stages[r] is the value with r steps to go.
    std::vector<std::vector<double>> stages;
    std::vector<double> residuals;
    int sweeps = 0;
};

/// Synchronous sweeps. Infinite horizon stops once the sup-norm residual is <= tol; a finite
/// horizon H runs exactly H sweeps. Throws ContractViolation for gamma=1 without a horizon.
ValueFunction value_iterate(const InducedMDP& mdp, double tol = 1e-8);

/// Q-values of every action at `state` with `to_go` steps remaining (ignored for infinite horizon).
std::vector<double> q_values(const InducedMDP& mdp, const ValueFunction& vf, std::size_t state, int to_go = 0);

/// First action (in order) whose Q is within kTieTolerance * max(1, |Q*|) of the best.
std::size_t greedy_action(const std::vector<double>& q);

struct Plan {
    std::vector<std::string> steps;
    double expected_value = 0.0;
    std::map<std::size_t, std::size_t> policy; ///< state index -> action index
    std::vector<std::size_t> visited;          ///< rollout states, start first
};

/// Greedy policy plus a most-probable-successor rollout from `state` that stops at an
/// absorbing state, a "noop" choice, a revisited state or the horizon.
Plan extract_plan(const InducedMDP& mdp, const ValueFunction& vf, std::size_t state);
inline Plan extract_plan(const InducedMDP& mdp, const ValueFunction& vf) { return extract_plan(mdp, vf, mdp.start); }

/// induce + solve + extract in one call.
Plan plan_for(const HypothesisPosterior& posterior, const Values& observed, const ProblemInstance& instance,
              PlanMode mode = PlanMode::Expected);

} // namespace scoop

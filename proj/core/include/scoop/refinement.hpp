#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoop/actions.hpp"
#include "scoop/instance.hpp"
#include "scoop/knowledge.hpp"
#include "scoop/planner.hpp"

namespace scoop {

struct AgentConfig {
    double oracle_cost = 0.5;     ///< magnitude compared against intervention cost
    double budget = 0.0;          ///< free-exploration allowance
    double gain_threshold = 0.01; ///< bits
    int max_steps = 20;           ///< ReAct loop iterations
    int voi_horizon = 1;
    double opportunity_cost = 0.0;
    /// Scores candidates by expected planned-value improvement and compares intervention vs
    /// oracle by cost per unit gain.
    bool value_voi = false;
    PlanMode plan_mode = PlanMode::Expected;
    int plan_steps_per_call = 1;
    int max_refinements_per_call = 1;
    /// Action input the scripted causal reasoner sends while refinement is worthwhile.
    std::string refine_input = "refine+plan";
};

void validate(const AgentConfig& config);
nlohmann::json to_json(const AgentConfig& config);
AgentConfig agent_config_from_json(const nlohmann::json& j);

struct QueryCandidate {
    OracleQuery query;
    double gain = 0.0;
};

struct InterventionOption {
    GroundAction action;
    double cost = 0.0;
    double expected_gain = 0.0;
};

struct RefinementProposal {
    std::vector<Edge> target_edges;
    double gain = 0.0;
    std::optional<OracleQuery> best_query;
    std::optional<InterventionOption> best_intervention;
    std::vector<QueryCandidate> queries;          ///< candidate order: edges, rules, hidden state
    std::vector<InterventionOption> interventions; ///< informative actions, name order

    bool empty() const { return !best_query; }
};

/// H(probs) minus the expected posterior entropy, where outcome_probs[i][o] = P(o | hypothesis i).
double expected_entropy_reduction(const std::vector<double>& probs, const std::vector<std::vector<double>>& outcome_probs);

/// Outcome distribution of an oracle query per support hypothesis (deterministic answers).
std::vector<std::vector<double>> query_outcomes(const HypothesisPosterior& posterior, const OracleQuery& query);

/// Distribution over observable outcomes of executing `action` (user passive), per hypothesis.
std::vector<std::vector<double>> intervention_outcomes(const HypothesisPosterior& posterior, const Values& observed,
                                                       std::size_t action);

RefinementProposal estimate_refinement(const HypothesisPosterior& posterior, const CausalGraph& graph,
                                       const Values& observed, const ProblemInstance& instance,
                                       const AgentConfig& config);

/// Best informative action priced at |r^a| + opportunity; nullopt when no action splits the support.
std::optional<InterventionOption> estimate_intervention_cost(const RefinementProposal& proposal, const Values& observed,
                                                             const ProblemInstance& instance, double opportunity = 0.0);

struct Intervene {
    GroundAction action;
};
struct AskOracle {
    OracleQuery query;
};
struct NoRefinement {};
using RefinementDecision = std::variant<Intervene, AskOracle, NoRefinement>;

std::string decision_name(const RefinementDecision& d);

RefinementDecision select_refinement(const RefinementProposal& proposal, const std::optional<InterventionOption>& option,
                                     const AgentConfig& config);

/// True when `action` (an env action or oracle query) has at least two outcomes with positive
/// predictive mass under `posterior` from `observed`.
bool is_disambiguating(const HypothesisPosterior& posterior, const Values& observed, const AgentAction& action);

/// Throws InferenceError on an empty proposal.
OracleQuery formulate_query(const RefinementProposal& proposal);

} // namespace scoop

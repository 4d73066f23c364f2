#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoop/agent.hpp"
#include "scoop/social.hpp"
#include "scoop/trace.hpp"

namespace scoop {

/// Sum over episodes and steps of gamma^(t + T(-theta)) * (r_u + r_a + beta), t zero-based per episode.
double compute_objective(const SessionTrace& session);

struct AmortizationPoint {
    std::string instance_id;
    double episode_return = 0.0; ///< undiscounted sum of r_u + r_a + beta
    int queries = 0;             ///< oracle queries
};

/// One point per task episode; exploration episodes are skipped.
std::vector<AmortizationPoint> amortization_curve(const SessionTrace& session);

struct SessionRunOptions {
    AgentKind kind = AgentKind::Causal;
    AgentConfig config;
    std::string reasoner = "scripted";
    std::string user_policy = "passive";
    int patience = 3;
    OracleConfig oracle;
    bool disclose_goal = true;
    HumanChannel* human = nullptr;
    /// Evidence the agent has already seen before the first instance (confounded opening).
    std::vector<Evidence> prefix;
};

EpisodeContext make_context(const ProblemInstance& instance, bool disclose_goal);

/// Runs the instances in order with one agent. A positive config.budget first spends free
/// exploration, recorded as an extra "explore" episode at the head of the session.
SessionTrace run_session(const std::vector<ProblemInstance>& instances, const SessionRunOptions& options);

/// Objective of the omniscient planner on the same instances minus the session's objective.
double regret_vs_omniscient(const SessionTrace& session, const std::vector<ProblemInstance>& instances,
                            SessionRunOptions options);

/// Fraction of best-query gain achieved per battery item, in battery order.
std::vector<double> battery_scores(AgentKind kind, std::uint64_t seed);

/// First refinement after the opening (or the first acting step when the agent never refines)
/// splits the hypotheses that survive the prefix.
bool first_refinement_splits(const EpisodeTrace& episode, const HypothesisPosterior& after_prefix,
                             const ProblemInstance& instance);

struct SuiteFamily {
    std::string name;
    std::string family; ///< blicket | boxes | explore_exploit | confounded | epistemic_battery | domain | session
    nlohmann::json params;
};

struct SuiteConfig {
    std::string name = "suite";
    std::vector<AgentKind> agents;
    std::vector<std::uint64_t> seeds;
    std::vector<SuiteFamily> families;
    SessionRunOptions options;
    int threads = 0; ///< 0 = hardware concurrency
    std::filesystem::path base_dir;
};

SuiteConfig suite_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct MetricsReport {
    std::string agent;
    std::string family;
    int sessions = 0;
    double objective = 0.0; ///< mean over seeds
    std::vector<double> session_objectives; ///< seed order
    std::vector<double> per_instance_return;  ///< mean over seeds
    std::vector<double> queries_per_instance; ///< mean over seeds
    double beta_total = 0.0;                  ///< sum over every step of every trace
    double regret_vs_omniscient = 0.0;        ///< mean over seeds
    std::optional<std::vector<double>> battery_scores;
    std::optional<double> split_rate;
};

nlohmann::json to_json(const MetricsReport& report);

struct SuiteCell {
    AgentKind agent = AgentKind::Causal;
    std::string family;
    std::uint64_t seed = 0;
    SessionTrace session;
    double objective = 0.0;
    double regret = 0.0;
    std::optional<std::vector<double>> battery;
    std::optional<bool> splits;
    std::string error;
};

struct SuiteResult {
    std::vector<SuiteCell> cells; ///< sorted by agent, family, seed
    std::vector<MetricsReport> rows;
    nlohmann::json report;
};

/// Instances a family yields for one seed (none for the battery).
std::vector<ProblemInstance> family_instances(const SuiteFamily& family, std::uint64_t seed,
                                              const std::filesystem::path& base_dir,
                                              std::vector<Evidence>* prefix = nullptr);

/// Runs the agent x family x seed grid in parallel. Writes one JSON-lines session per cell under
/// `out_dir/<agent>/<family>/seed-<n>.jsonl` and `out_dir/report.json` when out_dir is non-empty.
/// Throws the first cell error (in grid order) after every cell has finished.
SuiteResult run_suite(const SuiteConfig& config, const std::filesystem::path& out_dir = {});

} // namespace scoop

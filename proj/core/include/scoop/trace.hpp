#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scoop {

struct OracleLog {
    std::string query;
    std::string variant; ///< "language" | "chunk" | "obsfeedback" | "cannot-answer"
    std::string text;
    double cost_charged = 0.0;
    bool operator==(const OracleLog&) const = default;
};

/// One environment time step.
struct StepRecord {
    int seq = 0;
    int t = 0;
    int iteration = 0;
    std::uint64_t state_digest = 0; ///< digest of s_t
    std::string agent_action;
    std::string user_action;
    nlohmann::json obs;
    double r_u = 0.0;
    double r_a = 0.0;
    double beta = 0.0;
    std::optional<OracleLog> oracle;
    bool operator==(const StepRecord&) const = default;
};

struct ReactRecord {
    int seq = 0;
    int iteration = 0;
    std::string thought;
    std::string action;
    std::string action_input;
    std::string answer;
    std::string observation;
    bool operator==(const ReactRecord&) const = default;
};

struct DecisionRecord {
    int seq = 0;
    int iteration = 0;
    int t = 0;
    double gain_bits = 0.0;
    std::string chosen; ///< "intervene" | "ask_oracle" | "no_refinement"
    std::optional<double> intervention_cost;
    double oracle_cost = 0.0;
    std::string target;
    bool splits = false;
    bool operator==(const DecisionRecord&) const = default;
};

struct PlanRecord {
    int seq = 0;
    int iteration = 0;
    int t = 0;
    std::vector<std::string> steps;
    double expected_value = 0.0;
    bool operator==(const PlanRecord&) const = default;
};

struct EpisodeTrace {
    std::string instance_id;
    std::string true_hypothesis;
    std::string agent;
    std::vector<StepRecord> steps;
    std::vector<ReactRecord> react;
    std::vector<DecisionRecord> decisions;
    std::vector<PlanRecord> plans;
    std::string outcome; ///< "answered" | "failed"
    std::string answer;
    int next_seq = 0;

    int length() const { return static_cast<int>(steps.size()); }
    int oracle_queries() const;
    int user_queries() const;
    double beta_sum() const;
    bool operator==(const EpisodeTrace&) const;
};

struct SessionTrace {
    std::vector<EpisodeTrace> episodes;
    double gamma = 0.95;

    /// T(-theta): total steps of all earlier episodes.
    std::vector<int> offsets() const;
    bool operator==(const SessionTrace&) const = default;
};

/// JSON lines, one record per line in event order, closing with an "episode_end" line.
void write_jsonl(const EpisodeTrace& trace, std::ostream& out);
std::string to_jsonl(const EpisodeTrace& trace);
/// Parses every episode in a JSON-lines stream.
std::vector<EpisodeTrace> read_jsonl(std::istream& in);

void write_session(const SessionTrace& session, const std::filesystem::path& path);
SessionTrace read_session(const std::filesystem::path& path);

} // namespace scoop

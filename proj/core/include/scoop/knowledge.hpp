#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoop/actions.hpp"
#include "scoop/model.hpp"

namespace scoop {

inline constexpr double kStatusTolerance = 1e-9;

enum class EdgeStatus { Confirmed, Refuted, Unknown };
std::string_view to_string(EdgeStatus s);

struct EdgeBelief {
    EdgeStatus status = EdgeStatus::Unknown;
    double marginal = 0.0;
    bool operator==(const EdgeBelief&) const = default;
};

struct CausalGraph {
    std::vector<std::string> nodes;
    std::map<Edge, EdgeBelief> edges;

    std::vector<Edge> unknown_edges() const;
    bool operator==(const CausalGraph&) const = default;
};

/// Environment actions applied in one step (agent first, then user), with the full observable
/// readings before and after.
struct InterventionResult {
    std::vector<std::size_t> actions;
    std::vector<Reading> pre;
    std::vector<Reading> post;
};

struct PassiveObservation {
    std::vector<Reading> readings;
};

struct OracleChunk {
    OracleAnswer answer;
};

struct OracleDescription {
    std::string mechanism;
    std::vector<std::string> bindings;
    bool positive = true;
};

using Evidence = std::variant<InterventionResult, PassiveObservation, OracleChunk, OracleDescription>;

std::string describe(const Evidence& e, const Model& model);

/// Maps templated oracle language back to (mechanism, bindings, polarity). Exact match only.
std::optional<OracleDescription> parse_description(std::string_view text, const Model& model);

/// P(evidence | hypothesis).
double likelihood(const Model& model, std::size_t hypothesis, const Evidence& e);

/// Exact posterior over the model's hypotheses. Zero-mass hypotheses leave the support.
struct HypothesisPosterior {
    std::shared_ptr<const Model> model;
    std::vector<std::size_t> support; ///< hypothesis indices, ascending
    std::vector<double> probs;
    std::vector<std::string> evidence_log;

    std::vector<std::string> ids() const;
    double prob_of(std::size_t hypothesis) const;
};

/// Prior restricted to hypotheses containing every known rule. Throws InferenceError
/// ("inconsistent domain") when nothing survives.
std::pair<CausalGraph, HypothesisPosterior> create_graph(std::shared_ptr<const Model> model);

/// Throws InferenceError("evidence contradicts prior") when every hypothesis is ruled out.
HypothesisPosterior update(const HypothesisPosterior& posterior, const Evidence& evidence);

CausalGraph derive_graph(const HypothesisPosterior& posterior);
double entropy(const HypothesisPosterior& posterior);
double entropy_bits(const std::vector<double>& probs);
std::string map_hypothesis(const HypothesisPosterior& posterior);
std::size_t map_index(const HypothesisPosterior& posterior);

/// Degenerate posterior on one hypothesis.
HypothesisPosterior point_posterior(std::shared_ptr<const Model> model, std::size_t hypothesis);

nlohmann::json to_json(const HypothesisPosterior& posterior);
nlohmann::json to_json(const CausalGraph& graph);

} // namespace scoop

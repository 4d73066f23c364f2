#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scoop/domain.hpp"
#include "scoop/model.hpp"

namespace scoop {

// Oracle queries ------------------------------------------------------------

struct EdgeQuery {
    std::string cause;
    std::string effect;
    auto operator<=>(const EdgeQuery&) const = default;
};

struct RuleQuery {
    std::string rule_id;
    auto operator<=>(const RuleQuery&) const = default;
};

struct StateQuery {
    std::string feature; ///< ground label, e.g. "blicket(o1)"
    auto operator<=>(const StateQuery&) const = default;
};

struct MechanismQuery {
    std::string mechanism;
    std::vector<std::string> args;
    auto operator<=>(const MechanismQuery&) const = default;
};

using OracleQuery = std::variant<EdgeQuery, RuleQuery, StateQuery, MechanismQuery>;

/// "edge place(o1) -> detector", "rule or_o1", "state blicket(o1)", "mechanism id a b".
std::string to_string(const OracleQuery& q);
OracleQuery parse_oracle_query(std::string_view text);

// Oracle answers ------------------------------------------------------------

struct Reading {
    std::size_t feature = 0;
    std::uint8_t value = 0;
    auto operator<=>(const Reading&) const = default;
};

enum class AnswerKind { Language, Chunk, ObsFeedback, CannotAnswer };

/// Trace tag: "language", "chunk", "obsfeedback", "cannot-answer".
std::string_view to_string(AnswerKind k);

struct CausalChunk {
    Edge edge;
    std::string rule_id; ///< set for rule queries
    bool causes = false;
    double probability = 0.0;
    bool operator==(const CausalChunk&) const = default;
};

struct OracleAnswer {
    AnswerKind kind = AnswerKind::CannotAnswer;
    std::string text;
    std::optional<CausalChunk> chunk;
    std::vector<Reading> readings;
    bool truthful = true;
    double cost_charged = 0.0;
    bool operator==(const OracleAnswer&) const = default;
};

// Agent and user actions ----------------------------------------------------

struct NoOp {
    bool operator==(const NoOp&) const = default;
};

struct UserQuestion {
    enum class Kind { Goal, Preference };
    Kind kind = Kind::Goal;
    std::string feature;
    bool operator==(const UserQuestion&) const = default;
};

/// "goal" or "preference <feature>".
UserQuestion parse_user_question(std::string_view text);
std::string to_string(const UserQuestion& q);

struct AgentQuestion {
    std::string text;
    bool operator==(const AgentQuestion&) const = default;
};

using AgentAction = std::variant<NoOp, GroundAction, OracleQuery, UserQuestion>;
using UserAction = std::variant<NoOp, GroundAction, AgentQuestion>;

std::string to_string(const AgentAction& a);
std::string to_string(const UserAction& a);
inline bool is_query(const AgentAction& a) {
    return std::holds_alternative<OracleQuery>(a) || std::holds_alternative<UserQuestion>(a);
}

// Observations --------------------------------------------------------------

enum class ObsKind { EnvSignal, LanguageText, OracleAnswer, Error };
enum class TextSource { Descriptor, User, Oracle };

std::string_view to_string(ObsKind k);
std::string_view to_string(TextSource s);

struct Observation {
    ObsKind kind = ObsKind::EnvSignal;
    std::vector<Reading> readings;
    std::string text;
    TextSource source = TextSource::Descriptor;
    std::optional<OracleAnswer> answer;
    int step = 0;
    bool operator==(const Observation&) const = default;
};

/// Observable readings of a state, in feature order.
std::vector<Reading> observable_readings(const Model& model, const Values& s);

/// Templated sentences for readings, ordered by feature then arguments, joined by spaces.
std::string render_readings(const Model& model, const std::vector<Reading>& readings);

} // namespace scoop

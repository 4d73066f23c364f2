#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace scoop {

inline constexpr std::size_t kDefaultHypothesisCap = 4096;
inline constexpr std::size_t kWorldEnumerationCap = std::size_t{1} << 20;

/// "name(a,b)" for ground terms; nullary terms render as the bare name.
std::string ground_label(std::string_view name, const std::vector<std::string>& args);

/// A feature assignment. Text form: `open(box_a)` (true), `!open(box_a)` (false),
/// `detector=on` (any other value).
struct Literal {
    std::string feature;
    std::vector<std::string> args;
    std::string value;

    std::string label() const { return ground_label(feature, args); }
    std::string str() const;
    auto operator<=>(const Literal&) const = default;
};

Literal parse_literal(std::string_view text);

/// Grounded action pattern, text form `place(o1)`.
struct GroundAction {
    std::string name;
    std::vector<std::string> args;

    std::string str() const { return ground_label(name, args); }
    auto operator<=>(const GroundAction&) const = default;
};

GroundAction parse_action(std::string_view text);

/// Conjunction of literals. Text form joins literals with " & ".
struct Goal {
    std::vector<Literal> all;

    std::string str() const;
    bool operator==(const Goal&) const = default;
};

Goal parse_goal(std::string_view text);

struct FeatureDecl {
    std::string name;
    std::vector<std::string> arg_types;
    std::vector<std::string> values{"false", "true"};
    std::string default_value{"false"};
    bool observable = true;
    /// Recomputed after every environment action: reset to default, then state rules fire.
    bool derived = false;
    /// value -> sentence template; `{0}`, `{1}` expand to arguments, `{value}` to the value.
    std::map<std::string, std::string> text;
    /// When set, all groundings with value "true" collapse into one sentence; `{list}` expands
    /// to the comma separated first arguments.
    std::string list_text;

    bool is_bool() const { return values == std::vector<std::string>{"false", "true"}; }
    bool operator==(const FeatureDecl&) const = default;
};

struct ActionDecl {
    std::string name;
    std::vector<std::string> param_types;
    double cost = 0.0; ///< r^a for executing the action; non-positive.
    bool operator==(const ActionDecl&) const = default;
};

enum class KnowledgeStatus { Known, Unknown };

struct CausalRule {
    std::string id;
    std::vector<Literal> preconditions;
    std::optional<GroundAction> trigger_action;
    std::optional<Literal> trigger_literal;
    std::vector<Literal> effects;
    double probability = 1.0;
    KnowledgeStatus status = KnowledgeStatus::Unknown;
    /// Cause nodes of the edges this rule contributes. Defaults to the trigger and
    /// precondition labels when absent.
    std::optional<std::vector<std::string>> causes;

    bool operator==(const CausalRule&) const = default;
};

/// A complete rule-set candidate plus the static hidden assignments that come with it.
struct Hypothesis {
    std::string id;
    std::vector<std::string> rules;
    std::vector<Literal> hidden;
    bool operator==(const Hypothesis&) const = default;
};

/// World constraint: at least one literal must hold.
struct Clause {
    std::vector<Literal> any;
    bool operator==(const Clause&) const = default;
};

/// Language template pair the oracle uses for mechanism questions. Patterns and sentences
/// reference parameters as `{0}`, `{1}`; sentences use display names ("box_a" -> "box A").
struct Mechanism {
    std::string id;
    std::vector<std::string> param_types;
    std::string cause;
    std::string effect;
    std::string positive;
    std::string negative;
    bool operator==(const Mechanism&) const = default;
};

struct WeightedGoal {
    Goal goal;
    double weight = 1.0;
    bool operator==(const WeightedGoal&) const = default;
};

struct InstanceDefaults {
    double gamma = 0.95;
    int max_steps = 20;
    double goal_reward = 1.0;
    double oracle_query_cost = -0.5;
    double user_query_cost = -0.5;
    bool operator==(const InstanceDefaults&) const = default;
};

struct DomainSpec {
    std::string name;
    std::string description;
    std::vector<std::string> object_types;
    std::map<std::string, std::string> objects;
    std::vector<FeatureDecl> features;
    std::vector<ActionDecl> actions;
    std::vector<CausalRule> rules;
    std::vector<Hypothesis> hypotheses;
    std::map<std::string, double> rule_prior;
    std::vector<Clause> world_constraints;
    std::vector<WeightedGoal> goals;
    std::vector<Mechanism> mechanisms;
    std::vector<Literal> initial_state;
    bool persistent_rules = true;
    InstanceDefaults defaults;

    const FeatureDecl* find_feature(std::string_view name) const;
    const ActionDecl* find_action(std::string_view name) const;
    const CausalRule* find_rule(std::string_view id) const;
    const Hypothesis* find_hypothesis(std::string_view id) const;
    bool operator==(const DomainSpec&) const = default;
};

struct Violation {
    std::string element;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string str() const;
};

ValidationReport validate_domain(const DomainSpec& spec,
                                 std::size_t hypothesis_cap = kDefaultHypothesisCap);

DomainSpec domain_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DomainSpec& spec);

/// Sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const nlohmann::json& j);

DomainSpec load_domain(const std::filesystem::path& path);
void save_domain(const DomainSpec& spec, const std::filesystem::path& path);

/// "box_a" -> "box A", "o1" -> "o1".
std::string display_name(std::string_view object);

/// Expands `{0}`, `{1}`, ... with `args` and `{value}` with `value`.
std::string expand_template(std::string_view tmpl, const std::vector<std::string>& args,
                            std::string_view value = {});

} // namespace scoop

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scoop/domain.hpp"
#include "scoop/error.hpp"

namespace scoop {

/// Value index per ground feature, in Model::features() order.
using Values = std::vector<std::uint8_t>;

/// (cause node, effect node) of the causal graph.
using Edge = std::pair<std::string, std::string>;

struct Assign {
    std::size_t feature = 0;
    std::uint8_t value = 0;
    auto operator<=>(const Assign&) const = default;
};

struct GroundFeature {
    std::size_t decl = 0;
    std::vector<std::string> args;
    std::string label;
};

struct CompiledRule {
    std::size_t spec_index = 0;
    std::string id;
    std::vector<Assign> pre;
    std::optional<std::size_t> action;
    std::vector<Assign> effects;
    double probability = 1.0;
    bool known = false;
    std::vector<Edge> edges;
};

struct CompiledHypothesis {
    std::string id;
    std::vector<std::size_t> rules;               // compiled rule indices, spec order
    std::vector<Assign> hidden;
    std::vector<std::vector<std::size_t>> by_action; // action index -> triggered rules
    std::vector<std::size_t> state_rules;            // rules without an action trigger
    std::map<Edge, double> edges;                    // edge -> max rule probability
    bool has_all_known = true;
};

struct Transition {
    Values next;
    double probability = 0.0;
    bool blocked = false;
};

/// A domain grounded over a concrete object set: features, actions, rules and hypotheses
/// compiled to indices. Immutable once built and shared read-only across episodes.
class Model {
public:
    static std::shared_ptr<const Model> build(std::shared_ptr<const DomainSpec> spec,
                                              const std::map<std::string, std::string>& objects);
    static std::shared_ptr<const Model> build(const DomainSpec& spec);

    const DomainSpec& spec() const { return *spec_; }
    const std::shared_ptr<const DomainSpec>& spec_ptr() const { return spec_; }
    const std::map<std::string, std::string>& objects() const { return objects_; }

    const std::vector<GroundFeature>& features() const { return features_; }
    const FeatureDecl& decl(std::size_t feature) const { return spec_->features[features_[feature].decl]; }
    std::optional<std::size_t> feature_index(std::string_view label) const;
    std::optional<std::uint8_t> value_index(std::size_t feature, std::string_view value) const;
    const std::string& value_name(std::size_t feature, std::uint8_t value) const;
    bool observable(std::size_t feature) const { return decl(feature).observable; }
    const std::vector<std::size_t>& observable_features() const { return observable_; }
    const std::vector<std::size_t>& hidden_features() const { return hidden_; }

    /// Ground actions sorted by their text form.
    const std::vector<GroundAction>& actions() const { return actions_; }
    const std::vector<std::string>& action_names() const { return action_names_; }
    std::optional<std::size_t> action_index(std::string_view text) const;
    double action_cost(std::size_t action) const { return action_costs_[action]; }

    const std::vector<CompiledRule>& rules() const { return rules_; }
    const std::vector<CompiledHypothesis>& hypotheses() const { return hypotheses_; }
    std::optional<std::size_t> hypothesis_index(std::string_view id) const;

    /// Edges mentioned by any hypothesis, sorted.
    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<Assign> compile(const Literal& lit) const;
    std::optional<std::vector<Assign>> compile(const std::vector<Literal>& lits) const;
    bool holds(const Values& s, const std::vector<Assign>& lits) const;
    bool admissible(const Values& s) const;

    /// Declared defaults overridden by the domain's initial_state literals.
    Values initial_values() const;
    /// Replaces hidden features with the hypothesis' static assignment.
    Values with_hidden(Values s, std::size_t hypothesis) const;
    /// Observable projection; hidden features set to 0.
    Values project(const Values& s) const;

    /// Exact successor distribution of one environment action under a hypothesis
    /// (nullopt action = no world dynamics). Duplicate successors are merged.
    std::vector<Transition> successors(const Values& s, std::optional<std::size_t> action,
                                       std::size_t hypothesis) const;
    /// One sampled successor; probabilistic rule firings draw from the keyed stream.
    Transition sample(const Values& s, std::optional<std::size_t> action, std::size_t hypothesis,
                      std::uint64_t stream_key) const;

    /// Lexicographic "label=value;" serialization of every feature.
    std::string canonical_state(const Values& s) const;
    std::uint64_t digest(const Values& s) const;

    /// Number of complete assignments (saturating at SIZE_MAX).
    std::size_t assignment_space() const;
    /// Enumerates admissible assignments until `visit` returns true; returns whether it did.
    /// Throws ValidationError when the space exceeds kWorldEnumerationCap.
    template <class Visit>
    bool find_admissible(Visit&& visit) const;

private:
    Model() = default;

    std::shared_ptr<const DomainSpec> spec_;
    std::map<std::string, std::string> objects_;
    std::vector<GroundFeature> features_;
    std::map<std::string, std::size_t, std::less<>> feature_lookup_;
    std::vector<std::size_t> observable_;
    std::vector<std::size_t> hidden_;
    std::vector<GroundAction> actions_;
    std::vector<std::string> action_names_;
    std::vector<double> action_costs_;
    std::vector<CompiledRule> rules_;
    std::vector<CompiledHypothesis> hypotheses_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Assign>> constraints_;
};

template <class Visit>
bool Model::find_admissible(Visit&& visit) const {
    if (assignment_space() > kWorldEnumerationCap) {
        throw ValidationError("world configuration space exceeds enumeration cap of 2^20");
    }
    Values s(features_.size(), 0);
    for (;;) {
        if (admissible(s) && visit(static_cast<const Values&>(s))) return true;
        std::size_t i = 0;
        for (; i < s.size(); ++i) {
            if (++s[i] < decl(i).values.size()) break;
            s[i] = 0;
        }
        if (i == s.size()) return false;
    }
}

} // namespace scoop

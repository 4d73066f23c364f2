#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "scoop/domain.hpp"
#include "scoop/instance.hpp"
#include "scoop/knowledge.hpp"
#include "scoop/refinement.hpp"

namespace scoop {

enum class BlicketLaw { Or, And };

std::string_view to_string(BlicketLaw law);
BlicketLaw parse_law(std::string_view s);

/// Objects o1..on; hypotheses are (law, blicket subset) pairs with a uniform prior.
/// AND requires the whole non-empty blicket set on the detector.
DomainSpec gen_blicket(int n_objects, const std::set<BlicketLaw>& laws, std::uint64_t seed = 0);

/// Number of hypotheses gen_blicket produces.
std::size_t blicket_hypothesis_count(int n_objects, const std::set<BlicketLaw>& laws);

struct ConfoundedTask {
    DomainSpec domain;
    std::string pair_a;
    std::string pair_b;
    std::string true_hypothesis;
    /// Forced opening: both objects placed together, detector observed, then the scene is reset.
    std::vector<Evidence> prefix;
};

ConfoundedTask gen_confounded(std::uint64_t seed);

/// Persistent-rule 3-object OR blicket session. place/remove cost 1, goal reward 5,
/// oracle β = -oracle_cost.
SessionSpec gen_explore_exploit(int instance_count, double oracle_cost, std::uint64_t seed);

/// Boxes box_a.. with one item item_b hidden in a box (or loose). Chained precedence means box k
/// opens only after box k-1. rules_known keeps just the item-in-last-box hypothesis, all known.
DomainSpec gen_boxes(int n_boxes, std::uint64_t seed = 0, bool chained = true, bool rules_known = false);

struct BatteryItem {
    enum class Kind { Query, Counterfactual };
    std::string id;
    Kind kind = Kind::Query;
    std::shared_ptr<const Model> model;
    HypothesisPosterior posterior;
    Values state;
    std::string true_hypothesis;

    // Query items: every candidate with its gain, and the labeled best.
    std::vector<QueryCandidate> candidates;
    std::optional<OracleQuery> best_query;
    double best_gain = 0.0;

    // Counterfactual items: run `scenario` from `state` minus the step at `dropped`; is `literal` true?
    std::vector<std::size_t> scenario;
    std::size_t dropped = 0;
    Assign literal;
    std::string question;
    bool answer = false;
};

std::vector<BatteryItem> gen_epistemic_battery(std::uint64_t seed);

/// Gain of `chosen` divided by the best gain; 0/0 counts as 1.
double score_query(const BatteryItem& item, const std::optional<OracleQuery>& chosen);
/// 1 when `predicted` matches the answer under the true hypothesis, else 0.
double score_counterfactual(const BatteryItem& item, bool predicted);

/// Posterior-predictive probability that the counterfactual literal holds.
double counterfactual_probability(const HypothesisPosterior& posterior, const BatteryItem& item);

} // namespace scoop

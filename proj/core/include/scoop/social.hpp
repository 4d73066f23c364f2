#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "scoop/actions.hpp"
#include "scoop/instance.hpp"

namespace scoop {

struct OracleConfig {
    /// Probability of flipping a causal chunk's polarity. Zero keeps the oracle truthful.
    double epsilon = 0.0;
    std::uint64_t noise_seed = 0;
};

/// Console stand-in for the scripted user (REPL mode).
struct HumanChannel {
    std::istream* in = nullptr;
    std::ostream* out = nullptr;
};

struct UserProfile {
    Goal goal;
    std::map<std::string, double> preference_weights;
    std::string policy = "passive";
    int prompter_k = 3;
    int patience = 3;
    HumanChannel* human = nullptr;
};

const std::vector<std::string>& user_policies();
UserProfile make_profile(const ProblemInstance& instance, std::string policy = "passive", int patience = 3);

/// Pure in (query, instance, current). State queries read `current` when given, else the
/// instance's initial state. Unknown symbols yield CannotAnswer with β still charged.
OracleAnswer answer_oracle(const OracleQuery& query, const ProblemInstance& instance,
                           const WorldState* current = nullptr, const OracleConfig& config = {});

Observation answer_user(const UserQuestion& question, UserProfile& profile, const ProblemInstance& instance);

UserAction user_act(const WorldState& state, UserProfile& profile, const ProblemInstance& instance);

struct SocialActors {
    OracleConfig oracle;
    UserProfile user;
};

} // namespace scoop

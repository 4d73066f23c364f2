#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scoop/actions.hpp"
#include "scoop/environment.hpp"
#include "scoop/instance.hpp"
#include "scoop/knowledge.hpp"
#include "scoop/planner.hpp"
#include "scoop/refinement.hpp"
#include "scoop/social.hpp"
#include "scoop/trace.hpp"

namespace scoop {

inline constexpr std::string_view kCausalAction = "CausalRefinementAndAction";

struct EpisodeContext {
    std::string user_prompt;
    std::string environment_description;
    std::string multimodal_placeholder; ///< carried, never read
};

struct ReActStep {
    std::string thought;
    std::string action;
    std::string action_input;
    std::string answer;
    bool operator==(const ReActStep&) const = default;
};

/// Labeled lines in any order; the last occurrence of a label wins. nullopt when no label is present.
std::optional<ReActStep> parse_react_step(std::string_view text);
std::string format_react_step(const ReActStep& step);

struct MemoryEntry {
    int index = 0;
    std::optional<ReActStep> step;
    std::string observation;
};

class ConversationMemory {
public:
    void append(const ReActStep& step);
    void append(std::string observation);
    const std::vector<MemoryEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::string render() const;

private:
    std::vector<MemoryEntry> entries_;
};

/// Tools dispatched by name besides CausalRefinementAndAction.
const std::vector<std::string>& tool_names();
const std::string& format_instructions();
std::string build_prompt(const EpisodeContext& context, const ConversationMemory& memory);

/// Environment handle for one episode: picks the user's move, steps the world, records the trace.
class EpisodeEnv {
public:
    /// `auto_reset` restarts the scene (keeping t) whenever it turns terminal; used for exploration.
    EpisodeEnv(const ProblemInstance& instance, SocialActors& actors, EpisodeTrace& trace, bool auto_reset = false);

    struct Result {
        StepOutcome outcome;
        std::vector<Reading> pre;
        std::vector<std::size_t> env_actions; ///< agent then user, valid actions only
    };

    Result act(const AgentAction& action, int iteration);
    Observation observe() const { return scoop::observe(state_, instance_); }
    const WorldState& state() const { return state_; }
    const ProblemInstance& instance() const { return instance_; }
    bool terminal() const { return state_.terminal; }
    EpisodeTrace& trace() { return trace_; }
    std::optional<std::string> take_user_message();

private:
    const ProblemInstance& instance_;
    SocialActors& actors_;
    EpisodeTrace& trace_;
    WorldState state_;
    bool auto_reset_;
    std::optional<std::string> user_message_;
};

/// What the causal agent knows: posterior, derived graph and (once disclosed) the user goal.
struct AgentKnowledge {
    HypothesisPosterior posterior;
    CausalGraph graph;
    std::optional<Goal> goal;

    /// Bayes update from a step's results; keeps the graph in sync.
    void absorb(const EpisodeEnv::Result& result);
};

enum class AgentKind { Causal, Baseline, Planner, Omniscient };
std::string_view to_string(AgentKind k);
AgentKind parse_agent_kind(std::string_view s);

struct AgentView {
    const ProblemInstance* instance = nullptr;
    const AgentKnowledge* knowledge = nullptr;
    const WorldState* state = nullptr;
    const AgentConfig* config = nullptr;
    const EpisodeTrace* trace = nullptr;
    bool goal_satisfied = false;
    bool terminal = false;
};

struct ReasonerRequest {
    const EpisodeContext& context;
    const ConversationMemory& memory;
    std::string prompt;
    const AgentView& view;
};

class Reasoner {
public:
    virtual ~Reasoner() = default;
    /// Raw text expected in the ReAct line format.
    virtual std::string respond(const ReasonerRequest& request) = 0;
};

/// Deterministic advanced-agent policy: ask the goal, answer when done, refine while the gain is
/// significant, answer when no plan helps, otherwise plan.
ReActStep scripted_reasoner_step(const AgentView& view);
/// Fixed heuristic of the oracle-aided baseline: one edge query, then plan actions via EnvAct.
ReActStep baseline_reasoner_step(const AgentView& view);
/// Query-free: EnvAct plan actions only.
ReActStep planner_reasoner_step(const AgentView& view);

class ScriptedReasoner : public Reasoner {
public:
    explicit ScriptedReasoner(AgentKind kind) : kind_(kind) {}
    std::string respond(const ReasonerRequest& request) override;

private:
    AgentKind kind_;
};

/// POSTs {"prompt": ...} and reads {"text": ...}. Timeouts and transport errors retry once,
/// then yield an empty (malformed) reply.
class ExternalReasoner : public Reasoner {
public:
    explicit ExternalReasoner(std::string url, int timeout_seconds = 30);
    /// Reads SCOOP_REASONER_URL; throws Error when unset.
    static std::unique_ptr<ExternalReasoner> from_env();
    std::string respond(const ReasonerRequest& request) override;

private:
    std::string scheme_host_;
    std::string path_;
    int timeout_seconds_;
};

std::unique_ptr<Reasoner> make_reasoner(AgentKind kind, std::string_view which = "scripted");

struct EpisodeResult {
    bool answered = false;
    std::string answer;
    std::string failure;
    EpisodeTrace trace;
};

/// ReAct loop. `knowledge` must come from create_graph (or a carried posterior).
EpisodeResult run_episode(const ProblemInstance& instance, const EpisodeContext& context, const AgentConfig& config,
                          Reasoner& reasoner, SocialActors& actors, AgentKnowledge& knowledge,
                          std::string_view agent_name = "causal");

/// Refinement-and-action tool. Never throws; failures come back as "error: ..." observation text.
std::string causal_refinement_and_action(std::string_view action_input, AgentKnowledge& knowledge,
                                         const AgentConfig& config, EpisodeEnv& env, int iteration);

/// Spends `budget` on refinement decisions outside any task. Decisions and steps go to `trace`.
HypothesisPosterior free_exploration(const ProblemInstance& instance, double budget, SocialActors& actors,
                                     const AgentConfig& config, AgentKnowledge& knowledge, EpisodeTrace& trace);

/// Agent state across the instances of a session.
class Agent {
public:
    Agent(AgentKind kind, AgentConfig config, std::string reasoner = "scripted");

    /// Fresh prior, carried posterior (causal agent, persistent rules) or the truth (omniscient).
    void begin_instance(const ProblemInstance& instance);
    EpisodeResult run(const ProblemInstance& instance, const EpisodeContext& context, SocialActors& actors);

    AgentKind kind() const { return kind_; }
    const AgentConfig& config() const { return config_; }
    AgentKnowledge& knowledge() { return knowledge_; }
    const AgentKnowledge& knowledge() const { return knowledge_; }

private:
    AgentKind kind_;
    AgentConfig config_;
    std::unique_ptr<Reasoner> reasoner_;
    AgentKnowledge knowledge_;
    bool has_knowledge_ = false;
};

} // namespace scoop

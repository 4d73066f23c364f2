#include "scoop/trace.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "scoop/error.hpp"

namespace scoop {

int EpisodeTrace::oracle_queries() const {
    int n = 0;
    for (const auto& s : steps) n += s.oracle ? 1 : 0;
    return n;
}

int EpisodeTrace::user_queries() const {
    int n = 0;
    for (const auto& s : steps) n += s.agent_action.rfind("ask_user ", 0) == 0 ? 1 : 0;
    return n;
}

double EpisodeTrace::beta_sum() const {
    double b = 0.0;
    for (const auto& s : steps) b += s.beta;
    return b;
}

bool EpisodeTrace::operator==(const EpisodeTrace& o) const {
    return instance_id == o.instance_id && true_hypothesis == o.true_hypothesis && agent == o.agent &&
           steps == o.steps && react == o.react && decisions == o.decisions && plans == o.plans &&
           outcome == o.outcome && answer == o.answer;
}

std::vector<int> SessionTrace::offsets() const {
    std::vector<int> out;
    int acc = 0;
    for (const auto& e : episodes) {
        out.push_back(acc);
        acc += e.length();
    }
    return out;
}

namespace {

nlohmann::json step_json(const StepRecord& s) {
    nlohmann::json j{{"type", "step"},
                     {"seq", s.seq},
                     {"t", s.t},
                     {"iteration", s.iteration},
                     {"state_digest", s.state_digest},
                     {"agent_action", s.agent_action},
                     {"user_action", s.user_action},
                     {"obs", s.obs},
                     {"r_u", s.r_u},
                     {"r_a", s.r_a},
                     {"beta", s.beta}};
    if (s.oracle) {
        j["oracle"] = {{"query", s.oracle->query},
                       {"variant", s.oracle->variant},
                       {"text", s.oracle->text},
                       {"cost_charged", s.oracle->cost_charged}};
    }
    return j;
}

nlohmann::json react_json(const ReactRecord& r) {
    return {{"type", "react"},       {"seq", r.seq},       {"iteration", r.iteration},
            {"thought", r.thought},  {"action", r.action}, {"action_input", r.action_input},
            {"answer", r.answer},    {"observation", r.observation}};
}

nlohmann::json decision_json(const DecisionRecord& d) {
    return {{"type", "decision"},
            {"seq", d.seq},
            {"iteration", d.iteration},
            {"t", d.t},
            {"gain_bits", d.gain_bits},
            {"chosen", d.chosen},
            {"intervention_cost", d.intervention_cost ? nlohmann::json(*d.intervention_cost) : nlohmann::json(nullptr)},
            {"oracle_cost", d.oracle_cost},
            {"target", d.target},
            {"splits", d.splits}};
}

nlohmann::json plan_json(const PlanRecord& p) {
    return {{"type", "plan"}, {"seq", p.seq},     {"iteration", p.iteration},
            {"t", p.t},       {"steps", p.steps}, {"expected_value", p.expected_value}};
}

} // namespace

void write_jsonl(const EpisodeTrace& trace, std::ostream& out) {
    out << nlohmann::json{{"type", "episode"},
                          {"instance", trace.instance_id},
                          {"true_hypothesis", trace.true_hypothesis},
                          {"agent", trace.agent}}
               .dump()
        << '\n';
    std::map<int, nlohmann::json> ordered;
    for (const auto& s : trace.steps) ordered.emplace(s.seq, step_json(s));
    for (const auto& r : trace.react) ordered.emplace(r.seq, react_json(r));
    for (const auto& d : trace.decisions) ordered.emplace(d.seq, decision_json(d));
    for (const auto& p : trace.plans) ordered.emplace(p.seq, plan_json(p));
    for (const auto& [_, j] : ordered) out << j.dump() << '\n';
    out << nlohmann::json{{"type", "episode_end"},
                          {"outcome", trace.outcome},
                          {"answer", trace.answer},
                          {"length", trace.length()},
                          {"beta_sum", trace.beta_sum()}}
               .dump()
        << '\n';
}

std::string to_jsonl(const EpisodeTrace& trace) {
    std::ostringstream out;
    write_jsonl(trace, out);
    return out.str();
}

std::vector<EpisodeTrace> read_jsonl(std::istream& in) {
    std::vector<EpisodeTrace> out;
    std::string line;
    int lineno = 0;
    EpisodeTrace* cur = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        try {
            auto j = nlohmann::json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "session") continue;
            if (type == "episode") {
                out.emplace_back();
                cur = &out.back();
                cur->instance_id = j.at("instance").get<std::string>();
                cur->true_hypothesis = j.at("true_hypothesis").get<std::string>();
                cur->agent = j.at("agent").get<std::string>();
                continue;
            }
            if (!cur) throw ParseError(where, "record before episode header");
            if (j.contains("seq")) cur->next_seq = std::max(cur->next_seq, j["seq"].get<int>() + 1);
            if (type == "step") {
                StepRecord s;
                s.seq = j.at("seq").get<int>();
                s.t = j.at("t").get<int>();
                s.iteration = j.at("iteration").get<int>();
                s.state_digest = j.at("state_digest").get<std::uint64_t>();
                s.agent_action = j.at("agent_action").get<std::string>();
                s.user_action = j.at("user_action").get<std::string>();
                s.obs = j.at("obs");
                s.r_u = j.at("r_u").get<double>();
                s.r_a = j.at("r_a").get<double>();
                s.beta = j.at("beta").get<double>();
                if (j.contains("oracle")) {
                    const auto& o = j["oracle"];
                    s.oracle = OracleLog{o.at("query").get<std::string>(), o.at("variant").get<std::string>(),
                                         o.at("text").get<std::string>(), o.at("cost_charged").get<double>()};
                }
                cur->steps.push_back(std::move(s));
            } else if (type == "react") {
                cur->react.push_back({j.at("seq").get<int>(), j.at("iteration").get<int>(),
                                      j.at("thought").get<std::string>(), j.at("action").get<std::string>(),
                                      j.at("action_input").get<std::string>(), j.at("answer").get<std::string>(),
                                      j.at("observation").get<std::string>()});
            } else if (type == "decision") {
                DecisionRecord d;
                d.seq = j.at("seq").get<int>();
                d.iteration = j.at("iteration").get<int>();
                d.t = j.at("t").get<int>();
                d.gain_bits = j.at("gain_bits").get<double>();
                d.chosen = j.at("chosen").get<std::string>();
                if (!j.at("intervention_cost").is_null()) d.intervention_cost = j["intervention_cost"].get<double>();
                d.oracle_cost = j.at("oracle_cost").get<double>();
                d.target = j.at("target").get<std::string>();
                d.splits = j.at("splits").get<bool>();
                cur->decisions.push_back(std::move(d));
            } else if (type == "plan") {
                cur->plans.push_back({j.at("seq").get<int>(), j.at("iteration").get<int>(), j.at("t").get<int>(),
                                      j.at("steps").get<std::vector<std::string>>(),
                                      j.at("expected_value").get<double>()});
            } else if (type == "episode_end") {
                cur->outcome = j.at("outcome").get<std::string>();
                cur->answer = j.at("answer").get<std::string>();
                cur = nullptr;
            } else {
                throw ParseError(where, "unknown record type \"" + type + "\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where, e.what());
        }
    }
    return out;
}

void write_session(const SessionTrace& session, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << nlohmann::json{{"type", "session"}, {"gamma", session.gamma}, {"episodes", session.episodes.size()}}.dump()
        << '\n';
    for (const auto& e : session.episodes) write_jsonl(e, out);
}

SessionTrace read_session(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string first;
    if (!std::getline(in, first)) throw ParseError(path.string(), "empty trace file");
    SessionTrace s;
    try {
        auto j = nlohmann::json::parse(first);
        if (j.at("type") != "session") throw ParseError(path.string() + ":1", "missing session header");
        s.gamma = j.at("gamma").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ":1", e.what());
    }
    s.episodes = read_jsonl(in);
    return s;
}

} // namespace scoop

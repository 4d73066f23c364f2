#include "scoop/actions.hpp"

#include <map>
#include <sstream>

#include "scoop/error.hpp"

namespace scoop {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool consume(std::string_view& s, std::string_view word) {
    if (s.substr(0, word.size()) != word) return false;
    if (s.size() > word.size() && s[word.size()] != ' ') return false;
    s = trim(s.substr(word.size()));
    return true;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string to_string(const OracleQuery& q) {
    return std::visit(overloaded{
                          [](const EdgeQuery& e) { return "edge " + e.cause + " -> " + e.effect; },
                          [](const RuleQuery& r) { return "rule " + r.rule_id; },
                          [](const StateQuery& s) { return "state " + s.feature; },
                          [](const MechanismQuery& m) {
                              std::string out = "mechanism " + m.mechanism;
                              for (const auto& a : m.args) out += " " + a;
                              return out;
                          },
                      },
                      q);
}

OracleQuery parse_oracle_query(std::string_view text) {
    auto s = trim(text);
    if (consume(s, "edge")) {
        auto arrow = s.find("->");
        if (arrow == std::string_view::npos) throw ParseError("oracle query", "edge query needs \"->\"");
        auto cause = trim(s.substr(0, arrow));
        auto effect = trim(s.substr(arrow + 2));
        if (cause.empty() || effect.empty()) throw ParseError("oracle query", "empty edge endpoint");
        return EdgeQuery{std::string(cause), std::string(effect)};
    }
    if (consume(s, "rule")) {
        if (s.empty()) throw ParseError("oracle query", "rule query needs an id");
        return RuleQuery{std::string(s)};
    }
    if (consume(s, "state")) {
        if (s.empty()) throw ParseError("oracle query", "state query needs a feature");
        return StateQuery{std::string(s)};
    }
    if (consume(s, "mechanism")) {
        std::istringstream in{std::string(s)};
        MechanismQuery m;
        if (!(in >> m.mechanism)) throw ParseError("oracle query", "mechanism query needs an id");
        for (std::string a; in >> a;) m.args.push_back(a);
        return m;
    }
    throw ParseError("oracle query", "unrecognized query \"" + std::string(text) + "\"");
}

std::string_view to_string(AnswerKind k) {
    switch (k) {
    case AnswerKind::Language: return "language";
    case AnswerKind::Chunk: return "chunk";
    case AnswerKind::ObsFeedback: return "obsfeedback";
    case AnswerKind::CannotAnswer: return "cannot-answer";
    }
    return "cannot-answer";
}

UserQuestion parse_user_question(std::string_view text) {
    auto s = trim(text);
    if (s == "goal" || s == "what is the goal?") return {UserQuestion::Kind::Goal, {}};
    if (consume(s, "preference") && !s.empty()) return {UserQuestion::Kind::Preference, std::string(s)};
    throw ParseError("user question", "unrecognized question \"" + std::string(text) + "\"");
}

std::string to_string(const UserQuestion& q) {
    return q.kind == UserQuestion::Kind::Goal ? std::string("goal") : "preference " + q.feature;
}

std::string to_string(const AgentAction& a) {
    return std::visit(overloaded{
                          [](const NoOp&) { return std::string("noop"); },
                          [](const GroundAction& g) { return g.str(); },
                          [](const OracleQuery& q) { return "ask_oracle " + to_string(q); },
                          [](const UserQuestion& q) { return "ask_user " + to_string(q); },
                      },
                      a);
}

std::string to_string(const UserAction& a) {
    return std::visit(overloaded{
                          [](const NoOp&) { return std::string("noop"); },
                          [](const GroundAction& g) { return g.str(); },
                          [](const AgentQuestion& q) { return "ask_agent " + q.text; },
                      },
                      a);
}

std::string_view to_string(ObsKind k) {
    switch (k) {
    case ObsKind::EnvSignal: return "env";
    case ObsKind::LanguageText: return "text";
    case ObsKind::OracleAnswer: return "oracle";
    case ObsKind::Error: return "error";
    }
    return "error";
}

std::string_view to_string(TextSource s) {
    switch (s) {
    case TextSource::Descriptor: return "descriptor";
    case TextSource::User: return "user";
    case TextSource::Oracle: return "oracle";
    }
    return "descriptor";
}

std::vector<Reading> observable_readings(const Model& model, const Values& s) {
    std::vector<Reading> out;
    out.reserve(model.observable_features().size());
    for (auto f : model.observable_features()) out.push_back({f, s[f]});
    return out;
}

std::string render_readings(const Model& model, const std::vector<Reading>& readings) {
    std::vector<Reading> sorted = readings;
    std::sort(sorted.begin(), sorted.end());

    std::string out;
    auto emit = [&](const std::string& sentence) {
        if (sentence.empty()) return;
        if (!out.empty()) out += ' ';
        out += sentence;
    };
    // list-style declarations collapse into one sentence, emitted where the first grounding sorts
    std::map<std::size_t, std::vector<std::string>> lists;
    std::map<std::size_t, std::size_t> list_anchor;
    for (const auto& r : sorted) {
        const auto& gf = model.features()[r.feature];
        const auto& d = model.decl(r.feature);
        if (!d.list_text.empty()) {
            list_anchor.try_emplace(gf.decl, r.feature);
            if (model.value_name(r.feature, r.value) == "true") {
                lists[gf.decl].push_back(gf.args.empty() ? gf.label : gf.args.front());
            }
        }
    }
    for (const auto& r : sorted) {
        const auto& gf = model.features()[r.feature];
        const auto& d = model.decl(r.feature);
        const auto& value = model.value_name(r.feature, r.value);
        if (!d.list_text.empty()) {
            if (list_anchor[gf.decl] != r.feature) continue;
            auto it = lists.find(gf.decl);
            if (it == lists.end()) continue;
            std::string joined;
            for (const auto& x : it->second) joined += (joined.empty() ? "" : ", ") + x;
            std::string sentence = d.list_text;
            for (auto pos = sentence.find("{list}"); pos != std::string::npos; pos = sentence.find("{list}")) {
                sentence.replace(pos, 6, joined);
            }
            emit(sentence);
            continue;
        }
        if (auto t = d.text.find(value); t != d.text.end()) {
            emit(expand_template(t->second, gf.args, value));
        } else {
            emit(gf.label + "=" + value + ".");
        }
    }
    return out;
}

} // namespace scoop

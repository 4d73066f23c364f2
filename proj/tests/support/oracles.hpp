#pragma once

// Reference computations written against the blicket semantics directly, without the
// library's rule engine, likelihoods or VoI code.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scoop/actions.hpp"
#include "scoop/knowledge.hpp"
#include "scoop/model.hpp"

namespace oracle {

struct Blicket {
    bool or_law = true;
    std::set<std::string> members;
};

inline Blicket parse_hypothesis(const std::string& id) {
    Blicket b;
    const auto colon = id.find(':');
    b.or_law = id.substr(0, colon) == "or";
    const auto rest = id.substr(colon + 1);
    if (rest == "none") return b;
    std::size_t start = 0;
    for (;;) {
        const auto comma = rest.find(',', start);
        b.members.insert(rest.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return b;
}

inline bool detector_on(const Blicket& b, const std::set<std::string>& placed) {
    if (b.or_law) {
        for (const auto& o : placed) {
            if (b.members.count(o)) return true;
        }
        return false;
    }
    if (b.members.empty()) return false;
    for (const auto& o : b.members) {
        if (!placed.count(o)) return false;
    }
    return true;
}

inline std::string arg_of(const std::string& label) {
    const auto open = label.find('(');
    return label.substr(open + 1, label.size() - open - 2);
}

struct Scene {
    std::set<std::string> placed;
    bool has_detector = false;
    bool detector = false;
};

inline Scene scene(const scoop::Model& m, const std::vector<scoop::Reading>& readings) {
    Scene s;
    for (const auto& r : readings) {
        const auto& label = m.features()[r.feature].label;
        const auto& value = m.value_name(r.feature, r.value);
        if (label.rfind("placed(", 0) == 0 && value == "true") s.placed.insert(arg_of(label));
        if (label == "detector") {
            s.has_detector = true;
            s.detector = value == "on";
        }
    }
    return s;
}

inline bool edge_present(const Blicket& b, const std::string& cause, const std::string& effect) {
    if (effect.rfind("placed(", 0) == 0) {
        const auto open = cause.find('(');
        const auto verb = cause.substr(0, open);
        return (verb == "place" || verb == "remove") && arg_of(cause) == arg_of(effect);
    }
    if (effect != "detector" || cause.rfind("place(", 0) != 0) return false;
    return b.members.count(arg_of(cause)) > 0;
}

inline bool rule_present(const Blicket& b, const std::string& rule) {
    if (rule.rfind("put_", 0) == 0 || rule.rfind("take_", 0) == 0) return true;
    if (rule.rfind("or_", 0) == 0) return b.or_law && b.members.count(rule.substr(3));
    if (rule.rfind("and_", 0) == 0) {
        if (b.or_law) return false;
        std::string joined;
        for (const auto& o : b.members) joined += (joined.empty() ? "" : "_") + o;
        return joined == rule.substr(4);
    }
    return false;
}

/// 0/1 likelihood of one evidence item under a blicket hypothesis.
inline double likelihood(const scoop::Model& m, const Blicket& b, const scoop::Evidence& e) {
    if (const auto* iv = std::get_if<scoop::InterventionResult>(&e)) {
        const auto post = scene(m, iv->post);
        return post.has_detector && detector_on(b, post.placed) == post.detector ? 1.0 : 0.0;
    }
    if (const auto* po = std::get_if<scoop::PassiveObservation>(&e)) {
        const auto s = scene(m, po->readings);
        return !s.has_detector || detector_on(b, s.placed) == s.detector ? 1.0 : 0.0;
    }
    if (const auto* ch = std::get_if<scoop::OracleChunk>(&e)) {
        const auto& a = ch->answer;
        if (a.chunk) {
            const bool present = a.chunk->rule_id.empty() ? edge_present(b, a.chunk->edge.first, a.chunk->edge.second)
                                                          : rule_present(b, a.chunk->rule_id);
            return present == a.chunk->causes ? 1.0 : 0.0;
        }
        for (const auto& r : a.readings) {
            const auto& label = m.features()[r.feature].label;
            if (label.rfind("blicket(", 0) != 0) continue;
            const bool is = m.value_name(r.feature, r.value) == "true";
            if (is != (b.members.count(arg_of(label)) > 0)) return 0.0;
        }
        return 1.0;
    }
    return 1.0;
}

/// Prior times the product of all likelihoods, normalized in one pass.
inline std::map<std::string, double> brute_posterior(const scoop::Model& m, const std::vector<scoop::Evidence>& evidence) {
    std::map<std::string, double> out;
    double total = 0.0;
    for (const auto& [id, p] : m.spec().rule_prior) {
        const auto b = parse_hypothesis(id);
        double w = p;
        for (const auto& e : evidence) w *= likelihood(m, b, e);
        if (w > 0.0) out[id] = w;
        total += w;
    }
    for (auto& [id, w] : out) w /= total;
    return out;
}

inline double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log2(x);
    }
    return h;
}

/// Expected entropy reduction of a deterministic probe given each hypothesis' answer key.
template <class Key>
double gain(const std::vector<double>& probs, const std::vector<Key>& answers) {
    std::map<Key, std::vector<double>> by_answer;
    std::map<Key, double> mass;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        by_answer[answers[i]].push_back(probs[i]);
        mass[answers[i]] += probs[i];
    }
    double expected = 0.0;
    for (auto& [k, ps] : by_answer) {
        for (auto& x : ps) x /= mass[k];
        expected += mass[k] * entropy(ps);
    }
    return entropy(probs) - expected;
}

inline std::vector<Blicket> support_of(const scoop::HypothesisPosterior& p) {
    std::vector<Blicket> out;
    for (const auto& id : p.ids()) out.push_back(parse_hypothesis(id));
    return out;
}

/// Enumerated gain of an oracle query over the posterior support.
inline double query_gain(const scoop::HypothesisPosterior& p, const scoop::OracleQuery& q) {
    const auto hyps = support_of(p);
    std::vector<int> answers;
    for (const auto& b : hyps) {
        if (const auto* e = std::get_if<scoop::EdgeQuery>(&q)) {
            answers.push_back(edge_present(b, e->cause, e->effect));
        } else if (const auto* r = std::get_if<scoop::RuleQuery>(&q)) {
            answers.push_back(rule_present(b, r->rule_id));
        } else if (const auto* s = std::get_if<scoop::StateQuery>(&q)) {
            answers.push_back(b.members.count(arg_of(s->feature)) > 0);
        } else {
            answers.push_back(0);
        }
    }
    return gain(p.probs, answers);
}

/// Enumerated gain of executing a place/remove action from the placement set.
inline double action_gain(const scoop::HypothesisPosterior& p, std::set<std::string> placed, const scoop::GroundAction& a) {
    if (a.name == "place") placed.insert(a.args.at(0));
    if (a.name == "remove") placed.erase(a.args.at(0));
    std::vector<int> answers;
    for (const auto& b : support_of(p)) answers.push_back(detector_on(b, placed));
    return gain(p.probs, answers);
}

} // namespace oracle

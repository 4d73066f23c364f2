#include "scoop/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scoop/error.hpp"

namespace scoop {

namespace {

bool has_edge(const Model& m, std::size_t h, const Edge& e) { return m.hypotheses()[h].edges.count(e) > 0; }

bool has_rule(const Model& m, std::size_t h, std::string_view id) {
    const auto& rules = m.hypotheses()[h].rules;
    return std::any_of(rules.begin(), rules.end(), [&](std::size_t r) { return m.rules()[r].id == id; });
}

double hidden_consistency(const Model& m, std::size_t h, const std::vector<Reading>& readings) {
    const Values hidden = m.with_hidden(m.initial_values(), h);
    for (const auto& r : readings) {
        if (!m.observable(r.feature) && hidden[r.feature] != r.value) return 0.0;
    }
    return 1.0;
}

double description_likelihood(const Model& m, std::size_t h, const OracleDescription& d) {
    const auto& mechs = m.spec().mechanisms;
    auto it = std::find_if(mechs.begin(), mechs.end(), [&](const auto& x) { return x.id == d.mechanism; });
    if (it == mechs.end()) return 1.0;
    const Edge e{expand_template(it->cause, d.bindings), expand_template(it->effect, d.bindings)};
    return has_edge(m, h, e) == d.positive ? 1.0 : 0.0;
}

std::string readings_str(const Model& m, const std::vector<Reading>& rs) {
    std::string out;
    for (const auto& r : rs) {
        if (!out.empty()) out += ",";
        out += m.features()[r.feature].label + "=" + m.value_name(r.feature, r.value);
    }
    return out;
}

} // namespace

std::string_view to_string(EdgeStatus s) {
    switch (s) {
    case EdgeStatus::Confirmed: return "confirmed";
    case EdgeStatus::Refuted: return "refuted";
    case EdgeStatus::Unknown: return "unknown";
    }
    return "unknown";
}

std::vector<Edge> CausalGraph::unknown_edges() const {
    std::vector<Edge> out;
    for (const auto& [e, b] : edges) {
        if (b.status == EdgeStatus::Unknown) out.push_back(e);
    }
    return out;
}

std::string describe(const Evidence& e, const Model& m) {
    if (const auto* i = std::get_if<InterventionResult>(&e)) {
        std::string acts;
        for (auto a : i->actions) acts += (acts.empty() ? "" : ";") + m.action_names()[a];
        return "intervention [" + acts + "] -> " + readings_str(m, i->post);
    }
    if (const auto* p = std::get_if<PassiveObservation>(&e)) return "observation " + readings_str(m, p->readings);
    if (const auto* c = std::get_if<OracleChunk>(&e)) {
        return "oracle " + std::string(to_string(c->answer.kind)) + ": " + c->answer.text;
    }
    const auto& d = std::get<OracleDescription>(e);
    std::string b;
    for (const auto& x : d.bindings) b += " " + x;
    return "description " + d.mechanism + b + (d.positive ? " +" : " -");
}

std::optional<OracleDescription> parse_description(std::string_view text, const Model& m) {
    for (const auto& mech : m.spec().mechanisms) {
        std::vector<std::vector<std::string>> bindings{{}};
        for (const auto& type : mech.param_types) {
            std::vector<std::vector<std::string>> next;
            for (const auto& prefix : bindings) {
                for (const auto& [obj, t] : m.objects()) {
                    if (t != type) continue;
                    auto b = prefix;
                    b.push_back(obj);
                    next.push_back(std::move(b));
                }
            }
            bindings = std::move(next);
        }
        for (const auto& b : bindings) {
            std::vector<std::string> shown;
            for (const auto& x : b) shown.push_back(display_name(x));
            if (expand_template(mech.positive, shown) == text) return OracleDescription{mech.id, b, true};
            if (expand_template(mech.negative, shown) == text) return OracleDescription{mech.id, b, false};
        }
    }
    return std::nullopt;
}

double likelihood(const Model& m, std::size_t h, const Evidence& e) {
    if (const auto* i = std::get_if<InterventionResult>(&e)) {
        Values s = m.with_hidden(m.initial_values(), h);
        for (const auto& r : i->pre) {
            if (m.observable(r.feature)) s[r.feature] = r.value;
        }
        std::map<Values, double> dist{{s, 1.0}};
        for (auto a : i->actions) {
            std::map<Values, double> next;
            for (const auto& [v, p] : dist) {
                for (const auto& t : m.successors(v, a, h)) next[t.next] += p * t.probability;
            }
            dist = std::move(next);
        }
        double total = 0.0;
        for (const auto& [v, p] : dist) {
            bool match = std::all_of(i->post.begin(), i->post.end(),
                                     [&](const Reading& r) { return !m.observable(r.feature) || v[r.feature] == r.value; });
            if (match) total += p;
        }
        return total;
    }
    if (const auto* p = std::get_if<PassiveObservation>(&e)) return hidden_consistency(m, h, p->readings);
    if (const auto* d = std::get_if<OracleDescription>(&e)) return description_likelihood(m, h, *d);

    const auto& a = std::get<OracleChunk>(e).answer;
    switch (a.kind) {
    case AnswerKind::Chunk:
        if (!a.chunk) return 1.0;
        if (!a.chunk->rule_id.empty()) return has_rule(m, h, a.chunk->rule_id) == a.chunk->causes ? 1.0 : 0.0;
        return has_edge(m, h, a.chunk->edge) == a.chunk->causes ? 1.0 : 0.0;
    case AnswerKind::ObsFeedback: return hidden_consistency(m, h, a.readings);
    case AnswerKind::Language:
        if (auto d = parse_description(a.text, m)) return description_likelihood(m, h, *d);
        return 1.0;
    case AnswerKind::CannotAnswer: return 1.0;
    }
    return 1.0;
}

std::vector<std::string> HypothesisPosterior::ids() const {
    std::vector<std::string> out;
    out.reserve(support.size());
    for (auto h : support) out.push_back(model->hypotheses()[h].id);
    return out;
}

double HypothesisPosterior::prob_of(std::size_t hypothesis) const {
    auto it = std::lower_bound(support.begin(), support.end(), hypothesis);
    if (it == support.end() || *it != hypothesis) return 0.0;
    return probs[static_cast<std::size_t>(it - support.begin())];
}

std::pair<CausalGraph, HypothesisPosterior> create_graph(std::shared_ptr<const Model> model) {
    HypothesisPosterior post;
    post.model = model;
    double total = 0.0;
    const auto& prior = model->spec().rule_prior;
    for (std::size_t h = 0; h < model->hypotheses().size(); ++h) {
        const auto& hyp = model->hypotheses()[h];
        auto it = prior.find(hyp.id);
        if (it == prior.end() || it->second <= 0.0 || !hyp.has_all_known) continue;
        post.support.push_back(h);
        post.probs.push_back(it->second);
        total += it->second;
    }
    if (post.support.empty()) throw InferenceError("inconsistent domain: no hypothesis agrees with the known rules");
    for (auto& p : post.probs) p /= total;
    auto graph = derive_graph(post);
    return {std::move(graph), std::move(post)};
}

HypothesisPosterior update(const HypothesisPosterior& posterior, const Evidence& evidence) {
    const auto& m = *posterior.model;
    HypothesisPosterior out;
    out.model = posterior.model;
    out.evidence_log = posterior.evidence_log;
    double total = 0.0;
    for (std::size_t i = 0; i < posterior.support.size(); ++i) {
        const double w = posterior.probs[i] * likelihood(m, posterior.support[i], evidence);
        if (w <= 0.0) continue;
        out.support.push_back(posterior.support[i]);
        out.probs.push_back(w);
        total += w;
    }
    if (out.support.empty()) throw InferenceError("evidence contradicts prior: " + describe(evidence, m));
    for (auto& p : out.probs) p /= total;

    if (const auto* c = std::get_if<OracleChunk>(&evidence);
        c && c->answer.kind == AnswerKind::Language && !parse_description(c->answer.text, m)) {
        out.evidence_log.push_back("warning: unrecognized description ignored: " + c->answer.text);
    } else {
        out.evidence_log.push_back(describe(evidence, m));
    }
    return out;
}

CausalGraph derive_graph(const HypothesisPosterior& posterior) {
    const auto& m = *posterior.model;
    CausalGraph g;
    std::set<std::string> nodes;
    for (const auto& e : m.edges()) {
        double marginal = 0.0;
        for (std::size_t i = 0; i < posterior.support.size(); ++i) {
            if (has_edge(m, posterior.support[i], e)) marginal += posterior.probs[i];
        }
        marginal = std::clamp(marginal, 0.0, 1.0);
        EdgeStatus status = EdgeStatus::Unknown;
        if (marginal >= 1.0 - kStatusTolerance) {
            status = EdgeStatus::Confirmed;
        } else if (marginal <= kStatusTolerance) {
            status = EdgeStatus::Refuted;
        }
        g.edges.emplace(e, EdgeBelief{status, marginal});
        nodes.insert(e.first);
        nodes.insert(e.second);
    }
    g.nodes.assign(nodes.begin(), nodes.end());
    return g;
}

double entropy_bits(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

double entropy(const HypothesisPosterior& posterior) { return entropy_bits(posterior.probs); }

std::size_t map_index(const HypothesisPosterior& posterior) {
    const auto& hyps = posterior.model->hypotheses();
    std::size_t best = 0;
    for (std::size_t i = 1; i < posterior.support.size(); ++i) {
        const double p = posterior.probs[i];
        const double q = posterior.probs[best];
        if (p > q || (p == q && hyps[posterior.support[i]].id < hyps[posterior.support[best]].id)) best = i;
    }
    return posterior.support[best];
}

std::string map_hypothesis(const HypothesisPosterior& posterior) {
    return posterior.model->hypotheses()[map_index(posterior)].id;
}

HypothesisPosterior point_posterior(std::shared_ptr<const Model> model, std::size_t hypothesis) {
    HypothesisPosterior p;
    p.model = std::move(model);
    p.support = {hypothesis};
    p.probs = {1.0};
    return p;
}

nlohmann::json to_json(const HypothesisPosterior& posterior) {
    return {{"support", posterior.ids()}, {"probs", posterior.probs}, {"evidence_count", posterior.evidence_log.size()}};
}

nlohmann::json to_json(const CausalGraph& graph) {
    auto edges = nlohmann::json::array();
    for (const auto& [e, b] : graph.edges) {
        edges.push_back({{"cause", e.first}, {"effect", e.second}, {"status", to_string(b.status)}, {"marginal", b.marginal}});
    }
    return {{"nodes", graph.nodes}, {"edges", std::move(edges)}};
}

} // namespace scoop

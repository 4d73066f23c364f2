#include "scoop/model.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "scoop/rng.hpp"

namespace scoop {

namespace {

// Cartesian groundings of a typed parameter list over the object map (name order).
std::vector<std::vector<std::string>> groundings(const std::vector<std::string>& types,
                                                 const std::map<std::string, std::string>& objects) {
    std::vector<std::vector<std::string>> out{{}};
    for (const auto& t : types) {
        std::vector<std::vector<std::string>> next;
        for (const auto& prefix : out) {
            for (const auto& [name, type] : objects) {
                if (type != t) continue;
                auto g = prefix;
                g.push_back(name);
                next.push_back(std::move(g));
            }
        }
        out = std::move(next);
    }
    return out;
}

} // namespace

std::shared_ptr<const Model> Model::build(const DomainSpec& spec) {
    return build(std::make_shared<const DomainSpec>(spec), spec.objects);
}

std::shared_ptr<const Model> Model::build(std::shared_ptr<const DomainSpec> spec,
                                          const std::map<std::string, std::string>& objects) {
    std::shared_ptr<Model> m(new Model());
    m->spec_ = std::move(spec);
    m->objects_ = objects;
    const auto& d = *m->spec_;

    for (const auto& [name, type] : objects) {
        if (std::find(d.object_types.begin(), d.object_types.end(), type) == d.object_types.end()) {
            throw ValidationError("object \"" + name + "\" has undeclared type \"" + type + "\"");
        }
    }

    using Key = std::tuple<std::string, std::vector<std::string>>;
    std::vector<std::pair<Key, GroundFeature>> feats;
    for (std::size_t i = 0; i < d.features.size(); ++i) {
        for (auto& args : groundings(d.features[i].arg_types, objects)) {
            GroundFeature g{i, args, ground_label(d.features[i].name, args)};
            feats.push_back({Key{d.features[i].name, std::move(args)}, std::move(g)});
        }
    }
    std::sort(feats.begin(), feats.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [_, g] : feats) {
        m->feature_lookup_.emplace(g.label, m->features_.size());
        m->features_.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < m->features_.size(); ++i) {
        (m->decl(i).observable ? m->observable_ : m->hidden_).push_back(i);
    }

    std::vector<std::pair<GroundAction, double>> acts;
    for (const auto& a : d.actions) {
        for (auto& args : groundings(a.param_types, objects)) acts.push_back({GroundAction{a.name, args}, a.cost});
    }
    std::sort(acts.begin(), acts.end(), [](const auto& a, const auto& b) { return a.first.str() < b.first.str(); });
    for (auto& [a, cost] : acts) {
        m->action_names_.push_back(a.str());
        m->actions_.push_back(std::move(a));
        m->action_costs_.push_back(cost);
    }

    std::map<std::string, std::size_t> compiled_ids;
    for (std::size_t i = 0; i < d.rules.size(); ++i) {
        const auto& r = d.rules[i];
        auto pre = m->compile(r.preconditions);
        auto eff = m->compile(r.effects);
        std::optional<Assign> trig;
        if (r.trigger_literal) {
            trig = m->compile(*r.trigger_literal);
            if (!trig) continue;
        }
        if (!pre || !eff) continue;
        std::optional<std::size_t> action;
        if (r.trigger_action) {
            action = m->action_index(r.trigger_action->str());
            if (!action) continue;
        }
        CompiledRule c;
        c.spec_index = i;
        c.id = r.id;
        c.pre = std::move(*pre);
        if (trig) c.pre.push_back(*trig);
        c.action = action;
        c.effects = std::move(*eff);
        c.probability = r.probability;
        c.known = r.status == KnowledgeStatus::Known;

        std::vector<std::string> causes;
        if (r.causes) {
            causes = *r.causes;
        } else {
            if (r.trigger_action) causes.push_back(r.trigger_action->str());
            for (const auto& p : r.preconditions) causes.push_back(p.label());
            if (r.trigger_literal) causes.push_back(r.trigger_literal->label());
        }
        for (const auto& cause : causes) {
            for (const auto& e : r.effects) {
                Edge edge{cause, e.label()};
                if (edge.first != edge.second &&
                    std::find(c.edges.begin(), c.edges.end(), edge) == c.edges.end()) {
                    c.edges.push_back(std::move(edge));
                }
            }
        }
        compiled_ids.emplace(r.id, m->rules_.size());
        m->rules_.push_back(std::move(c));
    }

    std::set<Edge> all_edges;
    for (const auto& h : d.hypotheses) {
        CompiledHypothesis ch;
        ch.id = h.id;
        for (const auto& rid : h.rules) {
            if (auto it = compiled_ids.find(rid); it != compiled_ids.end()) ch.rules.push_back(it->second);
        }
        std::sort(ch.rules.begin(), ch.rules.end());
        ch.rules.erase(std::unique(ch.rules.begin(), ch.rules.end()), ch.rules.end());
        for (const auto& lit : h.hidden) {
            if (auto a = m->compile(lit)) ch.hidden.push_back(*a);
        }
        ch.by_action.assign(m->actions_.size(), {});
        for (auto ri : ch.rules) {
            const auto& rule = m->rules_[ri];
            if (rule.action) {
                ch.by_action[*rule.action].push_back(ri);
            } else {
                ch.state_rules.push_back(ri);
            }
            for (const auto& e : rule.edges) {
                auto& p = ch.edges[e];
                p = std::max(p, rule.probability);
                all_edges.insert(e);
            }
        }
        for (std::size_t ri = 0; ri < m->rules_.size(); ++ri) {
            if (m->rules_[ri].known && !std::binary_search(ch.rules.begin(), ch.rules.end(), ri)) {
                ch.has_all_known = false;
            }
        }
        m->hypotheses_.push_back(std::move(ch));
    }
    m->edges_.assign(all_edges.begin(), all_edges.end());

    for (const auto& clause : d.world_constraints) {
        std::vector<Assign> lits;
        for (const auto& lit : clause.any) {
            if (auto a = m->compile(lit)) lits.push_back(*a);
        }
        if (!lits.empty()) m->constraints_.push_back(std::move(lits));
    }
    return m;
}

std::optional<std::size_t> Model::feature_index(std::string_view label) const {
    auto it = feature_lookup_.find(label);
    if (it == feature_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint8_t> Model::value_index(std::size_t feature, std::string_view value) const {
    const auto& vals = decl(feature).values;
    auto it = std::find(vals.begin(), vals.end(), value);
    if (it == vals.end()) return std::nullopt;
    return static_cast<std::uint8_t>(it - vals.begin());
}

const std::string& Model::value_name(std::size_t feature, std::uint8_t value) const {
    return decl(feature).values.at(value);
}

std::optional<std::size_t> Model::action_index(std::string_view text) const {
    auto it = std::lower_bound(action_names_.begin(), action_names_.end(), text);
    if (it == action_names_.end() || *it != text) return std::nullopt;
    return static_cast<std::size_t>(it - action_names_.begin());
}

std::optional<std::size_t> Model::hypothesis_index(std::string_view id) const {
    for (std::size_t i = 0; i < hypotheses_.size(); ++i)
        if (hypotheses_[i].id == id) return i;
    return std::nullopt;
}

std::optional<Assign> Model::compile(const Literal& lit) const {
    auto f = feature_index(lit.label());
    if (!f) return std::nullopt;
    auto v = value_index(*f, lit.value);
    if (!v) return std::nullopt;
    return Assign{*f, *v};
}

std::optional<std::vector<Assign>> Model::compile(const std::vector<Literal>& lits) const {
    std::vector<Assign> out;
    out.reserve(lits.size());
    for (const auto& l : lits) {
        auto a = compile(l);
        if (!a) return std::nullopt;
        out.push_back(*a);
    }
    return out;
}

bool Model::holds(const Values& s, const std::vector<Assign>& lits) const {
    return std::all_of(lits.begin(), lits.end(), [&](const Assign& a) { return s[a.feature] == a.value; });
}

bool Model::admissible(const Values& s) const {
    for (const auto& clause : constraints_) {
        if (std::none_of(clause.begin(), clause.end(), [&](const Assign& a) { return s[a.feature] == a.value; })) {
            return false;
        }
    }
    return true;
}

Values Model::initial_values() const {
    Values s(features_.size(), 0);
    for (std::size_t i = 0; i < features_.size(); ++i) {
        s[i] = value_index(i, decl(i).default_value).value_or(0);
    }
    for (const auto& lit : spec_->initial_state) {
        if (auto a = compile(lit)) s[a->feature] = a->value;
    }
    return s;
}

Values Model::with_hidden(Values s, std::size_t hypothesis) const {
    for (auto f : hidden_) s[f] = value_index(f, decl(f).default_value).value_or(0);
    for (const auto& a : hypotheses_[hypothesis].hidden) s[a.feature] = a.value;
    return s;
}

Values Model::project(const Values& s) const {
    Values out = s;
    for (auto f : hidden_) out[f] = 0;
    return out;
}

namespace {

struct Expander {
    const Model& model;
    const CompiledHypothesis& hyp;
    const Values& start;
    bool enumerate;
    std::uint64_t key;
    std::uint64_t draws = 0;
    std::vector<Transition> out;

    // Returns the branch outcomes as (fire?, probability) pairs.
    template <class F>
    void branch(double p, double mass, F&& f) {
        if (p >= 1.0) {
            f(true, mass);
        } else if (p <= 0.0) {
            f(false, mass);
        } else if (enumerate) {
            f(true, mass * p);
            f(false, mass * (1.0 - p));
        } else {
            f(keyed_uniform({key, draws++}) < p, mass);
        }
    }

    void action_phase(const std::vector<std::size_t>& matched, std::size_t i, Values cur, double mass) {
        if (i == matched.size()) {
            state_phase(std::move(cur), 0, mass);
            return;
        }
        const auto& rule = model.rules()[matched[i]];
        branch(rule.probability, mass, [&](bool fire, double m) {
            Values next = cur;
            if (fire)
                for (const auto& e : rule.effects) next[e.feature] = e.value;
            action_phase(matched, i + 1, std::move(next), m);
        });
    }

    void state_phase(Values cur, std::size_t j, double mass) {
        if (j == 0) {
            for (std::size_t f = 0; f < cur.size(); ++f) {
                if (model.decl(f).derived) {
                    cur[f] = model.value_index(f, model.decl(f).default_value).value_or(0);
                }
            }
        }
        while (j < hyp.state_rules.size() && !model.holds(cur, model.rules()[hyp.state_rules[j]].pre)) ++j;
        if (j == hyp.state_rules.size()) {
            if (model.admissible(cur)) {
                out.push_back({std::move(cur), mass, false});
            } else {
                out.push_back({start, mass, true});
            }
            return;
        }
        const auto& rule = model.rules()[hyp.state_rules[j]];
        branch(rule.probability, mass, [&](bool fire, double m) {
            Values next = cur;
            if (fire)
                for (const auto& e : rule.effects) next[e.feature] = e.value;
            state_phase(std::move(next), j + 1, m);
        });
    }

    void run(std::optional<std::size_t> action) {
        if (!action) {
            out.push_back({start, 1.0, false});
            return;
        }
        std::vector<std::size_t> matched;
        for (auto ri : hyp.by_action[*action]) {
            if (model.holds(start, model.rules()[ri].pre)) matched.push_back(ri);
        }
        action_phase(matched, 0, start, 1.0);
    }
};

} // namespace

std::vector<Transition> Model::successors(const Values& s, std::optional<std::size_t> action,
                                          std::size_t hypothesis) const {
    Expander ex{*this, hypotheses_[hypothesis], s, true, 0, 0, {}};
    ex.run(action);
    std::map<Values, Transition> merged;
    for (auto& t : ex.out) {
        auto [it, inserted] = merged.try_emplace(t.next, t);
        if (!inserted) {
            it->second.probability += t.probability;
            it->second.blocked = it->second.blocked && t.blocked;
        }
    }
    std::vector<Transition> result;
    result.reserve(merged.size());
    for (auto& [_, t] : merged) result.push_back(std::move(t));
    return result;
}

Transition Model::sample(const Values& s, std::optional<std::size_t> action, std::size_t hypothesis,
                         std::uint64_t stream_key) const {
    Expander ex{*this, hypotheses_[hypothesis], s, false, stream_key, 0, {}};
    ex.run(action);
    return std::move(ex.out.front());
}

std::string Model::canonical_state(const Values& s) const {
    std::string out;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        out += features_[i].label;
        out += '=';
        out += value_name(i, s[i]);
        out += ';';
    }
    return out;
}

std::uint64_t Model::digest(const Values& s) const { return fnv1a64(canonical_state(s)); }

std::size_t Model::assignment_space() const {
    std::size_t total = 1;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        const auto n = decl(i).values.size();
        if (n != 0 && total > std::numeric_limits<std::size_t>::max() / n) {
            return std::numeric_limits<std::size_t>::max();
        }
        total *= n;
    }
    return total;
}

} // namespace scoop

#include "scoop/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "scoop/error.hpp"
#include "scoop/model.hpp"

namespace scoop {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

// name or name(a, b, ...); returns the rest of the input after the term.
std::string_view parse_term(std::string_view text, std::string& name, std::vector<std::string>& args) {
    std::size_t i = 0;
    while (i < text.size() && is_ident_char(text[i])) ++i;
    if (i == 0) throw ParseError("", "expected identifier in \"" + std::string(text) + "\"");
    name = std::string(text.substr(0, i));
    args.clear();
    auto rest = trim(text.substr(i));
    if (!rest.empty() && rest.front() == '(') {
        auto close = rest.find(')');
        if (close == std::string_view::npos) {
            throw ParseError("", "unbalanced parenthesis in \"" + std::string(text) + "\"");
        }
        auto inner = trim(rest.substr(1, close - 1));
        while (!inner.empty()) {
            auto comma = inner.find(',');
            auto arg = trim(inner.substr(0, comma));
            if (arg.empty() || !std::all_of(arg.begin(), arg.end(), is_ident_char)) {
                throw ParseError("", "bad argument in \"" + std::string(text) + "\"");
            }
            args.emplace_back(arg);
            if (comma == std::string_view::npos) break;
            inner = trim(inner.substr(comma + 1));
            if (inner.empty()) throw ParseError("", "trailing comma in \"" + std::string(text) + "\"");
        }
        rest = trim(rest.substr(close + 1));
    }
    return rest;
}

std::string lit_list_where(const std::string& base, std::size_t i) {
    return base + "/" + std::to_string(i);
}

} // namespace

std::string ground_label(std::string_view name, const std::vector<std::string>& args) {
    std::string out(name);
    if (args.empty()) return out;
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ',';
        out += args[i];
    }
    out += ')';
    return out;
}

std::string Literal::str() const {
    if (value == "true") return label();
    if (value == "false") return "!" + label();
    return label() + "=" + value;
}

Literal parse_literal(std::string_view text) {
    auto s = trim(text);
    bool negated = false;
    if (!s.empty() && s.front() == '!') {
        negated = true;
        s = trim(s.substr(1));
    }
    Literal lit;
    auto rest = parse_term(s, lit.feature, lit.args);
    if (rest.empty()) {
        lit.value = negated ? "false" : "true";
        return lit;
    }
    if (rest.front() != '=' || negated) {
        throw ParseError("", "malformed literal \"" + std::string(text) + "\"");
    }
    auto value = trim(rest.substr(1));
    if (value.empty() || !std::all_of(value.begin(), value.end(), is_ident_char)) {
        throw ParseError("", "malformed literal value in \"" + std::string(text) + "\"");
    }
    lit.value = std::string(value);
    return lit;
}

GroundAction parse_action(std::string_view text) {
    GroundAction a;
    auto rest = parse_term(trim(text), a.name, a.args);
    if (!rest.empty()) throw ParseError("", "malformed action \"" + std::string(text) + "\"");
    return a;
}

std::string Goal::str() const {
    std::string out;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i) out += " & ";
        out += all[i].str();
    }
    return out;
}

Goal parse_goal(std::string_view text) {
    Goal g;
    auto s = trim(text);
    while (!s.empty()) {
        auto amp = s.find('&');
        g.all.push_back(parse_literal(s.substr(0, amp)));
        if (amp == std::string_view::npos) break;
        s = trim(s.substr(amp + 1));
    }
    return g;
}

const FeatureDecl* DomainSpec::find_feature(std::string_view n) const {
    for (const auto& f : features)
        if (f.name == n) return &f;
    return nullptr;
}

const ActionDecl* DomainSpec::find_action(std::string_view n) const {
    for (const auto& a : actions)
        if (a.name == n) return &a;
    return nullptr;
}

const CausalRule* DomainSpec::find_rule(std::string_view id) const {
    for (const auto& r : rules)
        if (r.id == id) return &r;
    return nullptr;
}

const Hypothesis* DomainSpec::find_hypothesis(std::string_view id) const {
    for (const auto& h : hypotheses)
        if (h.id == id) return &h;
    return nullptr;
}

std::string ValidationReport::str() const {
    if (ok()) return "ok";
    std::string out;
    for (const auto& v : violations) {
        out += v.element + ": " + v.message + "\n";
    }
    return out;
}

std::string display_name(std::string_view object) {
    auto us = object.rfind('_');
    if (us == std::string_view::npos || us + 2 != object.size()) {
        std::string out(object);
        std::replace(out.begin(), out.end(), '_', ' ');
        return out;
    }
    std::string out(object.substr(0, us));
    std::replace(out.begin(), out.end(), '_', ' ');
    out += ' ';
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(object.back())));
    return out;
}

std::string expand_template(std::string_view tmpl, const std::vector<std::string>& args,
                            std::string_view value) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                auto key = tmpl.substr(i + 1, close - i - 1);
                if (key == "value") {
                    out += value;
                    i = close;
                    continue;
                }
                if (!key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
                        return std::isdigit(static_cast<unsigned char>(c));
                    })) {
                    auto idx = static_cast<std::size_t>(std::stoul(std::string(key)));
                    if (idx < args.size()) out += args[idx];
                    i = close;
                    continue;
                }
            }
        }
        out += tmpl[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Checker {
public:
    Checker(const DomainSpec& spec, ValidationReport& report) : spec_(spec), report_(report) {
        types_.insert(spec.object_types.begin(), spec.object_types.end());
    }

    void add(std::string element, std::string message) {
        report_.violations.push_back({std::move(element), std::move(message)});
    }

    bool type_known(const std::string& t) const { return types_.count(t) > 0; }

    void literal(const Literal& lit, const std::string& where) {
        const auto* f = spec_.find_feature(lit.feature);
        if (!f) {
            add(where, "unknown feature \"" + lit.feature + "\"");
            return;
        }
        if (f->arg_types.size() != lit.args.size()) {
            add(where, "arity mismatch for feature \"" + lit.feature + "\"");
            return;
        }
        for (std::size_t i = 0; i < lit.args.size(); ++i) {
            auto it = spec_.objects.find(lit.args[i]);
            if (it == spec_.objects.end()) {
                add(where, "unknown object \"" + lit.args[i] + "\"");
            } else if (it->second != f->arg_types[i]) {
                add(where, "object \"" + lit.args[i] + "\" is not of type " + f->arg_types[i]);
            }
        }
        if (std::find(f->values.begin(), f->values.end(), lit.value) == f->values.end()) {
            add(where, "value \"" + lit.value + "\" outside domain of \"" + lit.feature + "\"");
        }
    }

    void action(const GroundAction& a, const std::string& where) {
        const auto* d = spec_.find_action(a.name);
        if (!d) {
            add(where, "unknown action \"" + a.name + "\"");
            return;
        }
        if (d->param_types.size() != a.args.size()) {
            add(where, "arity mismatch for action \"" + a.name + "\"");
            return;
        }
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            auto it = spec_.objects.find(a.args[i]);
            if (it == spec_.objects.end() || it->second != d->param_types[i]) {
                add(where, "ill-typed argument \"" + a.args[i] + "\" of action \"" + a.name + "\"");
            }
        }
    }

private:
    const DomainSpec& spec_;
    ValidationReport& report_;
    std::set<std::string> types_;
};

} // namespace

ValidationReport validate_domain(const DomainSpec& spec, std::size_t hypothesis_cap) {
    ValidationReport report;
    Checker check(spec, report);

    std::set<std::string> seen;
    for (const auto& t : spec.object_types) {
        if (!seen.insert(t).second) check.add("object_types", "duplicate type \"" + t + "\"");
    }
    for (const auto& [name, type] : spec.objects) {
        if (!check.type_known(type)) check.add("objects/" + name, "undeclared type \"" + type + "\"");
    }

    seen.clear();
    for (std::size_t i = 0; i < spec.features.size(); ++i) {
        const auto& f = spec.features[i];
        const auto where = "features/" + f.name;
        if (!seen.insert(f.name).second) check.add(where, "duplicate feature");
        for (const auto& t : f.arg_types) {
            if (!check.type_known(t)) check.add(where, "argument type \"" + t + "\" not in object_types");
        }
        std::set<std::string> vals(f.values.begin(), f.values.end());
        if (f.values.empty() || vals.size() != f.values.size()) {
            check.add(where, "value domain must be non-empty and distinct");
        }
        if (f.values.size() > 255) check.add(where, "value domain too large");
        if (!vals.count(f.default_value)) check.add(where, "default value outside domain");
        for (const auto& [v, _] : f.text) {
            if (!vals.count(v)) check.add(where, "text template for unknown value \"" + v + "\"");
        }
        if (!f.observable && f.derived) check.add(where, "hidden features cannot be derived");
    }

    seen.clear();
    for (const auto& a : spec.actions) {
        const auto where = "actions/" + a.name;
        if (!seen.insert(a.name).second) check.add(where, "duplicate action");
        for (const auto& t : a.param_types) {
            if (!check.type_known(t)) check.add(where, "parameter type \"" + t + "\" not in object_types");
        }
        if (!(a.cost <= 0.0)) check.add(where, "action cost must be non-positive");
    }

    seen.clear();
    for (const auto& r : spec.rules) {
        const auto where = "rules/" + r.id;
        if (!seen.insert(r.id).second) check.add(where, "duplicate rule id");
        for (std::size_t i = 0; i < r.preconditions.size(); ++i) {
            check.literal(r.preconditions[i], lit_list_where(where + "/preconditions", i));
        }
        if (r.trigger_action) check.action(*r.trigger_action, where + "/trigger");
        if (r.trigger_literal) check.literal(*r.trigger_literal, where + "/trigger");
        if (r.effects.empty()) check.add(where, "effects must be non-empty");
        for (std::size_t i = 0; i < r.effects.size(); ++i) {
            const auto& e = r.effects[i];
            check.literal(e, lit_list_where(where + "/effects", i));
            if (const auto* f = spec.find_feature(e.feature); f && !f->observable) {
                check.add(where, "effect on hidden feature \"" + e.feature + "\"");
            }
            for (const auto& p : r.preconditions) {
                if (p.label() == e.label() && p.value != e.value) {
                    // An effect that flips its own precondition is a state change, not a contradiction,
                    // unless the rule has no trigger to distinguish before/after.
                    if (!r.trigger_action) check.add(where, "effect contradicts precondition " + p.str());
                }
            }
        }
        if (!(r.probability >= 0.0 && r.probability <= 1.0)) {
            check.add(where, "probability outside [0,1]");
        }
    }

    seen.clear();
    if (spec.hypotheses.size() > hypothesis_cap) {
        check.add("hypotheses", "hypothesis space of " + std::to_string(spec.hypotheses.size()) +
                                    " exceeds cap " + std::to_string(hypothesis_cap));
    }
    for (const auto& h : spec.hypotheses) {
        const auto where = "hypotheses/" + h.id;
        if (!seen.insert(h.id).second) check.add(where, "duplicate hypothesis id");
        for (const auto& rid : h.rules) {
            if (!spec.find_rule(rid)) check.add(where, "unknown rule \"" + rid + "\"");
        }
        for (std::size_t i = 0; i < h.hidden.size(); ++i) {
            check.literal(h.hidden[i], lit_list_where(where + "/hidden", i));
            if (const auto* f = spec.find_feature(h.hidden[i].feature); f && f->observable) {
                check.add(where, "hidden assignment to observable feature \"" + h.hidden[i].feature + "\"");
            }
        }
    }

    if (spec.rule_prior.empty()) check.add("rule_prior", "prior is empty");
    double total = 0.0;
    for (const auto& [id, p] : spec.rule_prior) {
        if (!spec.find_hypothesis(id)) check.add("rule_prior/" + id, "unknown hypothesis");
        if (!(p >= 0.0)) check.add("rule_prior/" + id, "negative probability");
        total += p;
    }
    if (!spec.rule_prior.empty() && std::abs(total - 1.0) > 1e-9) {
        check.add("rule_prior", "prior not normalized (sum " + std::to_string(total) + ")");
    }

    for (std::size_t i = 0; i < spec.world_constraints.size(); ++i) {
        const auto where = "world_constraints/" + std::to_string(i);
        if (spec.world_constraints[i].any.empty()) check.add(where, "empty clause");
        for (std::size_t j = 0; j < spec.world_constraints[i].any.size(); ++j) {
            check.literal(spec.world_constraints[i].any[j], lit_list_where(where, j));
        }
    }
    for (std::size_t i = 0; i < spec.goals.size(); ++i) {
        const auto where = "goals/" + std::to_string(i);
        for (const auto& lit : spec.goals[i].goal.all) check.literal(lit, where);
        if (!(spec.goals[i].weight > 0.0)) check.add(where, "goal weight must be positive");
    }
    for (const auto& m : spec.mechanisms) {
        for (const auto& t : m.param_types) {
            if (!check.type_known(t)) check.add("mechanisms/" + m.id, "unknown parameter type \"" + t + "\"");
        }
    }
    for (std::size_t i = 0; i < spec.initial_state.size(); ++i) {
        check.literal(spec.initial_state[i], lit_list_where("initial_state", i));
    }
    const auto& d = spec.defaults;
    if (!(d.gamma > 0.0 && d.gamma <= 1.0)) check.add("instance_defaults", "gamma outside (0,1]");
    if (d.max_steps <= 0) check.add("instance_defaults", "max_steps must be positive");
    if (!(d.oracle_query_cost <= 0.0) || !(d.user_query_cost <= 0.0)) {
        check.add("instance_defaults", "query costs must be non-positive");
    }

    if (report.ok()) {
        try {
            auto model = Model::build(spec);
            if (!model->find_admissible([](const Values&) { return true; })) {
                check.add("world_constraints", "no admissible world configuration");
            }
        } catch (const ValidationError& e) {
            check.add("world_constraints", e.what());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

std::vector<Literal> literals_from(const json& j, const std::string& where) {
    std::vector<Literal> out;
    if (j.is_null()) return out;
    if (!j.is_array()) throw ParseError(where, "expected an array of literals");
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            out.push_back(parse_literal(j[i].get<std::string>()));
        } catch (const ParseError& e) {
            throw ParseError(where + "/" + std::to_string(i), e.message());
        } catch (const json::exception& e) {
            throw ParseError(where + "/" + std::to_string(i), e.what());
        }
    }
    return out;
}

json literals_to(const std::vector<Literal>& lits) {
    json out = json::array();
    for (const auto& l : lits) out.push_back(l.str());
    return out;
}

template <class F>
auto at(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& e) {
        throw ParseError(where, e.what());
    }
}

} // namespace

DomainSpec domain_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("", "domain document must be a JSON object");
    DomainSpec spec;
    at("", [&] {
        spec.name = get_or<std::string>(j, "name", "");
        spec.description = get_or<std::string>(j, "description", "");
        spec.object_types = get_or<std::vector<std::string>>(j, "object_types", {});
        spec.objects = get_or<std::map<std::string, std::string>>(j, "objects", {});
        spec.persistent_rules = get_or<bool>(j, "persistent_rules", true);
        spec.rule_prior = get_or<std::map<std::string, double>>(j, "rule_prior", {});
        return 0;
    });

    if (auto it = j.find("features"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto where = "/features/" + std::to_string(i);
            const auto& fj = (*it)[i];
            spec.features.push_back(at(where, [&] {
                FeatureDecl f;
                f.name = fj.at("name").get<std::string>();
                f.arg_types = get_or<std::vector<std::string>>(fj, "args", {});
                if (auto v = fj.find("values"); v != fj.end()) {
                    f.values = v->get<std::vector<std::string>>();
                    f.default_value = f.values.empty() ? "" : f.values.front();
                } else if (get_or<std::string>(fj, "type", "bool") != "bool") {
                    throw ParseError(where, "feature needs \"values\" unless type is bool");
                }
                f.default_value = get_or<std::string>(fj, "default", f.default_value);
                f.observable = get_or<bool>(fj, "observable", true);
                f.derived = get_or<bool>(fj, "derived", false);
                f.text = get_or<std::map<std::string, std::string>>(fj, "text", {});
                f.list_text = get_or<std::string>(fj, "list_text", "");
                return f;
            }));
        }
    }
    if (auto it = j.find("actions"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& aj = (*it)[i];
            spec.actions.push_back(at("/actions/" + std::to_string(i), [&] {
                ActionDecl a;
                a.name = aj.at("name").get<std::string>();
                a.param_types = get_or<std::vector<std::string>>(aj, "params", {});
                a.cost = get_or<double>(aj, "cost", 0.0);
                return a;
            }));
        }
    }
    if (auto it = j.find("rules"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto where = "/rules/" + std::to_string(i);
            const auto& rj = (*it)[i];
            spec.rules.push_back(at(where, [&] {
                CausalRule r;
                r.id = rj.at("id").get<std::string>();
                r.preconditions = literals_from(get_or<json>(rj, "preconditions", json()), where + "/preconditions");
                r.effects = literals_from(get_or<json>(rj, "effects", json()), where + "/effects");
                if (auto t = rj.find("trigger"); t != rj.end() && !t->is_null()) {
                    try {
                        if (auto a = t->find("action"); a != t->end()) r.trigger_action = parse_action(a->get<std::string>());
                        if (auto w = t->find("when"); w != t->end()) r.trigger_literal = parse_literal(w->get<std::string>());
                    } catch (const ParseError& e) {
                        throw ParseError(where + "/trigger", e.message());
                    }
                }
                r.probability = get_or<double>(rj, "probability", 1.0);
                const auto status = get_or<std::string>(rj, "status", "unknown");
                if (status == "known") {
                    r.status = KnowledgeStatus::Known;
                } else if (status == "unknown") {
                    r.status = KnowledgeStatus::Unknown;
                } else {
                    throw ParseError(where + "/status", "status must be \"known\" or \"unknown\"");
                }
                if (auto c = rj.find("causes"); c != rj.end() && !c->is_null()) {
                    r.causes = c->get<std::vector<std::string>>();
                }
                return r;
            }));
        }
    }
    if (auto it = j.find("hypotheses"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto where = "/hypotheses/" + std::to_string(i);
            const auto& hj = (*it)[i];
            spec.hypotheses.push_back(at(where, [&] {
                Hypothesis h;
                h.id = hj.at("id").get<std::string>();
                h.rules = get_or<std::vector<std::string>>(hj, "rules", {});
                h.hidden = literals_from(get_or<json>(hj, "hidden", json()), where + "/hidden");
                return h;
            }));
        }
    }
    if (auto it = j.find("world_constraints"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto where = "/world_constraints/" + std::to_string(i);
            spec.world_constraints.push_back(
                at(where, [&] { return Clause{literals_from((*it)[i].at("any"), where + "/any")}; }));
        }
    }
    if (auto it = j.find("goals"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto where = "/goals/" + std::to_string(i);
            const auto& gj = (*it)[i];
            spec.goals.push_back(at(where, [&] {
                WeightedGoal g;
                try {
                    g.goal = parse_goal(gj.at("goal").get<std::string>());
                } catch (const ParseError& e) {
                    throw ParseError(where + "/goal", e.message());
                }
                g.weight = get_or<double>(gj, "weight", 1.0);
                return g;
            }));
        }
    }
    if (auto it = j.find("mechanisms"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& mj = (*it)[i];
            spec.mechanisms.push_back(at("/mechanisms/" + std::to_string(i), [&] {
                Mechanism m;
                m.id = mj.at("id").get<std::string>();
                m.param_types = get_or<std::vector<std::string>>(mj, "params", {});
                m.cause = mj.at("cause").get<std::string>();
                m.effect = mj.at("effect").get<std::string>();
                m.positive = mj.at("positive").get<std::string>();
                m.negative = mj.at("negative").get<std::string>();
                return m;
            }));
        }
    }
    spec.initial_state = literals_from(get_or<json>(j, "initial_state", json()), "/initial_state");
    if (auto it = j.find("instance_defaults"); it != j.end()) {
        at("/instance_defaults", [&] {
            auto& d = spec.defaults;
            d.gamma = get_or<double>(*it, "gamma", d.gamma);
            d.max_steps = get_or<int>(*it, "max_steps", d.max_steps);
            d.goal_reward = get_or<double>(*it, "goal_reward", d.goal_reward);
            d.oracle_query_cost = get_or<double>(*it, "oracle_query_cost", d.oracle_query_cost);
            d.user_query_cost = get_or<double>(*it, "user_query_cost", d.user_query_cost);
            return 0;
        });
    }
    return spec;
}

json to_json(const DomainSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["description"] = spec.description;
    j["object_types"] = spec.object_types;
    j["objects"] = spec.objects;
    j["features"] = json::array();
    for (const auto& f : spec.features) {
        json fj;
        fj["name"] = f.name;
        fj["args"] = f.arg_types;
        if (f.is_bool()) {
            fj["type"] = "bool";
        } else {
            fj["values"] = f.values;
        }
        fj["default"] = f.default_value;
        fj["observable"] = f.observable;
        fj["derived"] = f.derived;
        fj["text"] = f.text;
        fj["list_text"] = f.list_text;
        j["features"].push_back(std::move(fj));
    }
    j["actions"] = json::array();
    for (const auto& a : spec.actions) {
        j["actions"].push_back({{"name", a.name}, {"params", a.param_types}, {"cost", a.cost}});
    }
    j["rules"] = json::array();
    for (const auto& r : spec.rules) {
        json rj;
        rj["id"] = r.id;
        rj["preconditions"] = literals_to(r.preconditions);
        rj["effects"] = literals_to(r.effects);
        if (r.trigger_action || r.trigger_literal) {
            json t = json::object();
            if (r.trigger_action) t["action"] = r.trigger_action->str();
            if (r.trigger_literal) t["when"] = r.trigger_literal->str();
            rj["trigger"] = t;
        } else {
            rj["trigger"] = nullptr;
        }
        rj["probability"] = r.probability;
        rj["status"] = r.status == KnowledgeStatus::Known ? "known" : "unknown";
        rj["causes"] = r.causes ? json(*r.causes) : json(nullptr);
        j["rules"].push_back(std::move(rj));
    }
    j["hypotheses"] = json::array();
    for (const auto& h : spec.hypotheses) {
        j["hypotheses"].push_back({{"id", h.id}, {"rules", h.rules}, {"hidden", literals_to(h.hidden)}});
    }
    j["rule_prior"] = spec.rule_prior;
    j["world_constraints"] = json::array();
    for (const auto& c : spec.world_constraints) j["world_constraints"].push_back({{"any", literals_to(c.any)}});
    j["goals"] = json::array();
    for (const auto& g : spec.goals) j["goals"].push_back({{"goal", g.goal.str()}, {"weight", g.weight}});
    j["mechanisms"] = json::array();
    for (const auto& m : spec.mechanisms) {
        j["mechanisms"].push_back({{"id", m.id},
                                   {"params", m.param_types},
                                   {"cause", m.cause},
                                   {"effect", m.effect},
                                   {"positive", m.positive},
                                   {"negative", m.negative}});
    }
    j["initial_state"] = literals_to(spec.initial_state);
    j["persistent_rules"] = spec.persistent_rules;
    const auto& d = spec.defaults;
    j["instance_defaults"] = {{"gamma", d.gamma},
                              {"max_steps", d.max_steps},
                              {"goal_reward", d.goal_reward},
                              {"oracle_query_cost", d.oracle_query_cost},
                              {"user_query_cost", d.user_query_cost}};
    return j;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

DomainSpec load_domain(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), "cannot open file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ":byte " + std::to_string(e.byte), e.what());
    }
    try {
        return domain_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + "#" + e.where(), e.message());
    }
}

void save_domain(const DomainSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << canonical_dump(to_json(spec));
}

} // namespace scoop

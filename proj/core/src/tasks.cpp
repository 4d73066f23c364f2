#include "scoop/tasks.hpp"

#include <algorithm>
#include <random>

#include "scoop/error.hpp"
#include "scoop/social.hpp"

namespace scoop {

namespace {

Literal lit(std::string feature, std::vector<std::string> args, std::string value = "true") {
    return Literal{std::move(feature), std::move(args), std::move(value)};
}

FeatureDecl feature(std::string name, std::vector<std::string> args) {
    FeatureDecl f;
    f.name = std::move(name);
    f.arg_types = std::move(args);
    return f;
}

std::string object_name(int i) { return "o" + std::to_string(i + 1); }

std::string join(const std::vector<std::string>& xs, const char* sep) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : sep) + x;
    return out;
}

std::string box_name(int k) { return std::string("box_") + static_cast<char>('a' + k); }

void uniform_prior(DomainSpec& d) {
    const double p = 1.0 / static_cast<double>(d.hypotheses.size());
    for (const auto& h : d.hypotheses) d.rule_prior[h.id] = p;
}

} // namespace

std::string_view to_string(BlicketLaw law) { return law == BlicketLaw::Or ? "or" : "and"; }

BlicketLaw parse_law(std::string_view s) {
    if (s == "or" || s == "OR") return BlicketLaw::Or;
    if (s == "and" || s == "AND") return BlicketLaw::And;
    throw ParseError("law", "expected OR or AND, got \"" + std::string(s) + "\"");
}

std::size_t blicket_hypothesis_count(int n, const std::set<BlicketLaw>& laws) {
    const std::size_t subsets = std::size_t{1} << n;
    return (laws.count(BlicketLaw::Or) ? subsets : 0) + (laws.count(BlicketLaw::And) ? subsets - 1 : 0);
}

DomainSpec gen_blicket(int n, const std::set<BlicketLaw>& laws, std::uint64_t seed) {
    if (n < 1 || n > 6) throw ValidationError("blicket n_objects must be in [1,6]");
    if (laws.empty()) throw ValidationError("blicket needs at least one law");
    DomainSpec d;
    d.name = "blicket-" + std::to_string(n);
    d.description = "blicket detector with " + std::to_string(n) + " objects, seed " + std::to_string(seed);
    d.object_types = {"Object"};
    std::vector<std::string> objs;
    for (int i = 0; i < n; ++i) {
        objs.push_back(object_name(i));
        d.objects[objs.back()] = "Object";
    }

    auto placed = feature("placed", {"Object"});
    placed.list_text = "placed: {list}.";
    auto blicket = feature("blicket", {"Object"});
    blicket.observable = false;
    blicket.text = {{"true", "{0} is a blicket."}, {"false", "{0} is not a blicket."}};
    auto detector = feature("detector", {});
    detector.values = {"off", "on"};
    detector.default_value = "off";
    detector.derived = true;
    detector.text = {{"off", "the detector is {value}."}, {"on", "the detector is {value}."}};
    d.features = {placed, blicket, detector};
    d.actions = {{"place", {"Object"}, -0.1}, {"remove", {"Object"}, -0.1}};

    std::vector<std::string> known;
    for (const auto& o : objs) {
        CausalRule put{"put_" + o, {}, GroundAction{"place", {o}}, std::nullopt, {lit("placed", {o})}, 1.0,
                       KnowledgeStatus::Known, std::nullopt};
        CausalRule take{"take_" + o, {}, GroundAction{"remove", {o}}, std::nullopt, {lit("placed", {o}, "false")},
                        1.0, KnowledgeStatus::Known, std::nullopt};
        d.rules.push_back(put);
        d.rules.push_back(take);
        known.push_back(put.id);
        known.push_back(take.id);
    }
    if (laws.count(BlicketLaw::Or)) {
        for (const auto& o : objs) {
            d.rules.push_back({"or_" + o, {lit("placed", {o})}, std::nullopt, std::nullopt,
                               {lit("detector", {}, "on")}, 1.0, KnowledgeStatus::Unknown,
                               std::vector<std::string>{"place(" + o + ")"}});
        }
    }

    for (auto law : {BlicketLaw::Or, BlicketLaw::And}) {
        if (!laws.count(law)) continue;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (law == BlicketLaw::And && mask == 0) continue;
            std::vector<std::string> members;
            for (int i = 0; i < n; ++i) {
                if (mask & (1u << i)) members.push_back(objs[i]);
            }
            Hypothesis h;
            h.id = std::string(to_string(law)) + ":" + (members.empty() ? "none" : join(members, ","));
            h.rules = known;
            if (law == BlicketLaw::Or) {
                for (const auto& o : members) h.rules.push_back("or_" + o);
            } else {
                CausalRule r{"and_" + join(members, "_"), {}, std::nullopt, std::nullopt,
                             {lit("detector", {}, "on")}, 1.0, KnowledgeStatus::Unknown, std::vector<std::string>{}};
                for (const auto& o : members) {
                    r.preconditions.push_back(lit("placed", {o}));
                    r.causes->push_back("place(" + o + ")");
                }
                d.rules.push_back(r);
                h.rules.push_back(r.id);
            }
            for (int i = 0; i < n; ++i) h.hidden.push_back(lit("blicket", {objs[i]}, (mask & (1u << i)) ? "true" : "false"));
            d.hypotheses.push_back(std::move(h));
        }
    }
    uniform_prior(d);
    d.goals = {{Goal{{lit("detector", {}, "on")}}, 1.0}};
    d.mechanisms = {{"activates", {"Object"}, "place({0})", "detector", "{0} activates the detector",
                     "{0} does not activate the detector"}};
    d.persistent_rules = true;
    return d;
}

ConfoundedTask gen_confounded(std::uint64_t seed) {
    ConfoundedTask task;
    task.domain = gen_blicket(3, {BlicketLaw::Or}, seed);
    task.domain.name = "confounded";
    task.domain.description = "three objects, two of which only ever appear together in the opening evidence";

    std::mt19937_64 rng(seed);
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    const auto& pr = pairs[rng() % 3];
    task.pair_a = object_name(pr[0]);
    task.pair_b = object_name(pr[1]);

    std::vector<std::string> survivors;
    for (const auto& h : task.domain.hypotheses) {
        const auto members = h.id.substr(h.id.find(':') + 1);
        auto contains = [&](const std::string& o) {
            std::size_t pos = 0;
            while ((pos = members.find(o, pos)) != std::string::npos) {
                const auto end = pos + o.size();
                if ((pos == 0 || members[pos - 1] == ',') && (end == members.size() || members[end] == ',')) return true;
                pos = end;
            }
            return false;
        };
        if (contains(task.pair_a) || contains(task.pair_b)) survivors.push_back(h.id);
    }
    task.true_hypothesis = survivors[rng() % survivors.size()];

    auto model = Model::build(task.domain);
    const auto& m = *model;
    InterventionResult joint;
    joint.actions = {*m.action_index("place(" + task.pair_a + ")"), *m.action_index("place(" + task.pair_b + ")")};
    const Values start = m.initial_values();
    joint.pre = observable_readings(m, start);
    Values after = start;
    after[*m.feature_index("placed(" + task.pair_a + ")")] = 1;
    after[*m.feature_index("placed(" + task.pair_b + ")")] = 1;
    after[*m.feature_index("detector")] = *m.value_index(*m.feature_index("detector"), "on");
    joint.post = observable_readings(m, after);
    task.prefix.push_back(joint);
    return task;
}

SessionSpec gen_explore_exploit(int instance_count, double oracle_cost, std::uint64_t seed) {
    if (instance_count < 2) throw ValidationError("explore_exploit needs at least 2 instances");
    if (oracle_cost < 0.0) throw ValidationError("oracle_cost must be non-negative");
    auto d = gen_blicket(3, {BlicketLaw::Or}, seed);
    d.name = "explore-exploit";
    d.description = "persistent three-object blicket session";
    for (auto& a : d.actions) a.cost = -1.0;
    d.defaults.goal_reward = 5.0;
    d.defaults.oracle_query_cost = -oracle_cost;
    d.defaults.gamma = 0.95;
    SessionSpec s;
    s.domain = std::make_shared<const DomainSpec>(std::move(d));
    s.instance_count = instance_count;
    s.seed = seed;
    s.shared_gamma = 0.95;
    return s;
}

DomainSpec gen_boxes(int n, std::uint64_t seed, bool chained, bool rules_known) {
    if (n < 1 || n > 4) throw ValidationError("boxes n_boxes must be in [1,4]");
    DomainSpec d;
    d.name = "boxes-" + std::to_string(n);
    d.description = std::to_string(n) + " boxes and one item, seed " + std::to_string(seed);
    d.object_types = {"Box", "Item"};
    for (int k = 0; k < n; ++k) d.objects[box_name(k)] = "Box";
    d.objects["item_b"] = "Item";

    auto open = feature("open", {"Box"});
    open.text = {{"true", "{0} is open."}, {"false", "{0} is closed."}};
    auto accessible = feature("accessible", {"Item"});
    accessible.text = {{"true", "{0} is accessible."}, {"false", "{0} is not accessible."}};
    auto contains = feature("contains", {"Box", "Item"});
    contains.observable = false;
    contains.text = {{"true", "{0} contains {1}."}, {"false", "{0} does not contain {1}."}};
    d.features = {accessible, contains, open};
    d.actions = {{"open", {"Box"}, -0.1}, {"take", {"Item"}, -0.1}};

    std::vector<std::string> known;
    for (int k = 0; k < n; ++k) {
        CausalRule r{"open_" + box_name(k), {}, GroundAction{"open", {box_name(k)}}, std::nullopt,
                     {lit("open", {box_name(k)})}, 1.0, KnowledgeStatus::Known, std::nullopt};
        if (chained && k > 0) r.preconditions.push_back(lit("open", {box_name(k - 1)}));
        d.rules.push_back(r);
        known.push_back(r.id);
    }
    const auto status = rules_known ? KnowledgeStatus::Known : KnowledgeStatus::Unknown;
    for (int k = rules_known ? n - 1 : 0; k < n; ++k) {
        d.rules.push_back({"take_from_" + box_name(k), {lit("open", {box_name(k)})}, GroundAction{"take", {"item_b"}},
                           std::nullopt, {lit("accessible", {"item_b"})}, 1.0, status, std::nullopt});
        Hypothesis h{"in:" + box_name(k), known, {}};
        h.rules.push_back(d.rules.back().id);
        for (int j = 0; j < n; ++j) h.hidden.push_back(lit("contains", {box_name(j), "item_b"}, j == k ? "true" : "false"));
        d.hypotheses.push_back(std::move(h));
    }
    if (!rules_known) {
        d.rules.push_back({"take_loose", {}, GroundAction{"take", {"item_b"}}, std::nullopt,
                           {lit("accessible", {"item_b"})}, 1.0, KnowledgeStatus::Unknown, std::nullopt});
        Hypothesis h{"loose", known, {}};
        h.rules.push_back("take_loose");
        for (int j = 0; j < n; ++j) h.hidden.push_back(lit("contains", {box_name(j), "item_b"}, "false"));
        d.hypotheses.push_back(std::move(h));
    }
    uniform_prior(d);
    d.goals = {{Goal{{lit("accessible", {"item_b"})}}, 1.0}};
    d.mechanisms = {{"open_before_retrieve", {"Box", "Item"}, "open({0})", "accessible({1})",
                     "{0} must be opened before retrieving {1}", "{0} need not be opened before retrieving {1}"}};
    d.persistent_rules = true;
    return d;
}

namespace {

BatteryItem query_item(std::string id, std::shared_ptr<const Model> model, HypothesisPosterior post,
                       const std::string& truth) {
    BatteryItem item;
    item.id = std::move(id);
    item.kind = BatteryItem::Kind::Query;
    item.model = model;
    item.posterior = std::move(post);
    item.state = model->project(model->initial_values());
    item.true_hypothesis = truth;
    auto graph = derive_graph(item.posterior);
    // a dummy instance suffices: entropy scoring never consults goals or costs
    ProblemInstance inst;
    inst.model = model;
    auto proposal = estimate_refinement(item.posterior, graph, item.state, inst, AgentConfig{});
    item.candidates = proposal.queries;
    item.best_query = proposal.best_query;
    item.best_gain = proposal.gain;
    return item;
}

HypothesisPosterior observe_scenario(HypothesisPosterior post, const std::vector<std::size_t>& actions,
                                     std::size_t truth) {
    const auto& m = *post.model;
    Values s = m.with_hidden(m.initial_values(), truth);
    for (auto a : actions) {
        InterventionResult ev;
        ev.actions = {a};
        ev.pre = observable_readings(m, s);
        s = m.successors(s, a, truth).front().next;
        ev.post = observable_readings(m, s);
        post = update(post, ev);
    }
    return post;
}

Values run_deterministic(const Model& m, Values s, const std::vector<std::size_t>& actions, std::size_t skip,
                         std::size_t hypothesis) {
    s = m.with_hidden(s, hypothesis);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i == skip) continue;
        auto succ = m.successors(s, actions[i], hypothesis);
        s = std::max_element(succ.begin(), succ.end(), [](const auto& x, const auto& y) {
                return x.probability < y.probability;
            })->next;
    }
    return s;
}

} // namespace

std::vector<BatteryItem> gen_epistemic_battery(std::uint64_t seed) {
    std::vector<BatteryItem> items;
    std::mt19937_64 rng(seed);

    auto two_or = Model::build(gen_blicket(2, {BlicketLaw::Or}, seed));
    auto [g2, prior2] = create_graph(two_or);
    items.push_back(query_item("uniform-4", two_or, prior2, "or:o1"));

    const auto place1 = *two_or->action_index("place(o1)");
    const auto place2 = *two_or->action_index("place(o2)");
    const auto truth_o1 = *two_or->hypothesis_index("or:o1");
    auto after_o1 = observe_scenario(prior2, {place1}, truth_o1);
    items.push_back(query_item("after-o1-on", two_or, after_o1, "or:o1"));

    items.push_back(query_item("degenerate", two_or, point_posterior(two_or, truth_o1), "or:o1"));

    auto mixed = Model::build(gen_blicket(3, {BlicketLaw::Or, BlicketLaw::And}, seed));
    auto [g3, prior3] = create_graph(mixed);
    const auto& mixed_ids = mixed->hypotheses();
    items.push_back(query_item("or-and-3", mixed, prior3, mixed_ids[rng() % mixed_ids.size()].id));

    auto conf = gen_confounded(seed);
    auto conf_model = Model::build(conf.domain);
    auto [gc, conf_post] = create_graph(conf_model);
    for (const auto& ev : conf.prefix) conf_post = update(conf_post, ev);
    items.push_back(query_item("confounded", conf_model, conf_post, conf.true_hypothesis));

    // what-if items: scenario places objects, one placement is undone
    auto cf = [&](std::string id, HypothesisPosterior post, const std::string& truth, std::vector<std::size_t> scenario,
                  std::size_t dropped) {
        BatteryItem item;
        item.id = std::move(id);
        item.kind = BatteryItem::Kind::Counterfactual;
        item.model = post.model;
        item.posterior = std::move(post);
        item.state = item.model->project(item.model->initial_values());
        item.true_hypothesis = truth;
        item.scenario = std::move(scenario);
        item.dropped = dropped;
        const auto det = *item.model->feature_index("detector");
        item.literal = {det, *item.model->value_index(det, "on")};
        item.question = "would the detector be on had " + item.model->action_names()[item.scenario[dropped]] +
                        " not happened?";
        const Values end = run_deterministic(*item.model, item.model->initial_values(), item.scenario, item.dropped,
                                             *item.model->hypothesis_index(truth));
        item.answer = end[det] == item.literal.value;
        items.push_back(std::move(item));
    };

    auto identified = update(after_o1, OracleChunk{answer_oracle(EdgeQuery{"place(o2)", "detector"},
                                                                 ground_instance(two_or, "or:o1",
                                                                                 two_or->spec().goals[0].goal, seed))});
    cf("whatif-drop-o1", identified, "or:o1", {place1, place2}, 0);
    cf("whatif-drop-o2", after_o1, "or:o1", {place1, place2}, 1);

    const auto truth_o2 = *two_or->hypothesis_index("or:o2");
    auto o2_only = observe_scenario(prior2, {place2}, truth_o2);
    o2_only = update(o2_only, OracleChunk{answer_oracle(EdgeQuery{"place(o1)", "detector"},
                                                        ground_instance(two_or, "or:o2", two_or->spec().goals[0].goal, seed))});
    cf("whatif-o2-alone", o2_only, "or:o2", {place1, place2}, 0);
    return items;
}

double score_query(const BatteryItem& item, const std::optional<OracleQuery>& chosen) {
    if (item.best_gain <= 1e-12) return 1.0;
    if (!chosen) return 0.0;
    const double g = expected_entropy_reduction(item.posterior.probs, query_outcomes(item.posterior, *chosen));
    return std::clamp(g / item.best_gain, 0.0, 1.0);
}

double score_counterfactual(const BatteryItem& item, bool predicted) { return predicted == item.answer ? 1.0 : 0.0; }

double counterfactual_probability(const HypothesisPosterior& posterior, const BatteryItem& item) {
    double p = 0.0;
    for (std::size_t i = 0; i < posterior.support.size(); ++i) {
        const Values end = run_deterministic(*item.model, item.model->initial_values(), item.scenario, item.dropped,
                                             posterior.support[i]);
        if (end[item.literal.feature] == item.literal.value) p += posterior.probs[i];
    }
    return p;
}

} // namespace scoop

#include "scoop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "scoop/error.hpp"
#include "scoop/tasks.hpp"

namespace scoop {

double compute_objective(const SessionTrace& session) {
    double total = 0.0;
    int offset = 0;
    for (const auto& e : session.episodes) {
        for (std::size_t t = 0; t < e.steps.size(); ++t) {
            const auto& s = e.steps[t];
            total += std::pow(session.gamma, static_cast<double>(offset) + static_cast<double>(t)) * (s.r_u + s.r_a + s.beta);
        }
        offset += e.length();
    }
    return total;
}

std::vector<AmortizationPoint> amortization_curve(const SessionTrace& session) {
    std::vector<AmortizationPoint> out;
    for (const auto& e : session.episodes) {
        if (e.instance_id == "explore") continue;
        AmortizationPoint p{e.instance_id, 0.0, e.oracle_queries()};
        for (const auto& s : e.steps) p.episode_return += s.r_u + s.r_a + s.beta;
        out.push_back(std::move(p));
    }
    return out;
}

EpisodeContext make_context(const ProblemInstance& instance, bool disclose_goal) {
    const auto& m = *instance.model;
    std::string env = instance.domain().description;
    if (!env.empty()) env += " ";
    env += "actions:";
    for (std::size_t i = 0; i < m.action_names().size(); ++i) env += (i ? ", " : " ") + m.action_names()[i];
    env += ".";
    std::string prompt = disclose_goal ? "goal: " + instance.user_goal.str() : "please help me with a task here.";
    return {std::move(prompt), std::move(env), ""};
}

SessionTrace run_session(const std::vector<ProblemInstance>& instances, const SessionRunOptions& options) {
    SessionTrace session;
    if (instances.empty()) return session;
    session.gamma = instances.front().gamma;
    Agent agent(options.kind, options.config, options.reasoner);

    auto actors_for = [&](const ProblemInstance& inst) {
        SocialActors actors{options.oracle, make_profile(inst, options.human ? "human" : options.user_policy,
                                                          options.patience)};
        actors.user.human = options.human;
        return actors;
    };

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        agent.begin_instance(inst);
        if (i == 0 && options.kind != AgentKind::Omniscient) {
            auto& k = agent.knowledge();
            for (const auto& ev : options.prefix) k.posterior = update(k.posterior, ev);
            if (!options.prefix.empty()) k.graph = derive_graph(k.posterior);
            if (options.config.budget > 0.0 && options.kind == AgentKind::Causal) {
                EpisodeTrace explore;
                explore.instance_id = "explore";
                explore.true_hypothesis = inst.true_hypothesis;
                explore.agent = std::string(to_string(options.kind));
                auto actors = actors_for(inst);
                free_exploration(inst, options.config.budget, actors, options.config, k, explore);
                explore.outcome = "answered";
                explore.answer = "exploration";
                session.episodes.push_back(std::move(explore));
            }
        }
        auto actors = actors_for(inst);
        auto result = agent.run(inst, make_context(inst, options.disclose_goal), actors);
        session.episodes.push_back(std::move(result.trace));
    }
    return session;
}

double regret_vs_omniscient(const SessionTrace& session, const std::vector<ProblemInstance>& instances,
                            SessionRunOptions options) {
    options.kind = AgentKind::Omniscient;
    options.reasoner = "scripted";
    options.human = nullptr;
    options.prefix.clear();
    options.config.budget = 0.0;
    return compute_objective(run_session(instances, options)) - compute_objective(session);
}

std::vector<double> battery_scores(AgentKind kind, std::uint64_t seed) {
    std::vector<double> out;
    for (const auto& item : gen_epistemic_battery(seed)) {
        if (item.kind == BatteryItem::Kind::Query) {
            std::optional<OracleQuery> chosen;
            const auto graph = derive_graph(item.posterior);
            if (kind == AgentKind::Causal) {
                ProblemInstance inst;
                inst.model = item.model;
                chosen = estimate_refinement(item.posterior, graph, item.state, inst, AgentConfig{}).best_query;
            } else if (kind == AgentKind::Baseline) {
                const auto unknown = graph.unknown_edges();
                if (!unknown.empty()) chosen = EdgeQuery{unknown.front().first, unknown.front().second};
            }
            out.push_back(score_query(item, chosen));
        } else {
            HypothesisPosterior belief = item.posterior;
            if (kind == AgentKind::Omniscient) {
                belief = point_posterior(item.model, *item.model->hypothesis_index(item.true_hypothesis));
            } else if (kind != AgentKind::Causal) {
                belief = point_posterior(item.model, map_index(item.posterior));
            }
            out.push_back(score_counterfactual(item, counterfactual_probability(belief, item) >= 0.5));
        }
    }
    return out;
}

bool first_refinement_splits(const EpisodeTrace& episode, const HypothesisPosterior& after_prefix,
                             const ProblemInstance& instance) {
    for (const auto& d : episode.decisions) {
        if (d.chosen != "no_refinement") return d.splits;
    }
    if (episode.steps.empty()) return false;
    const auto& first = episode.steps.front().agent_action;
    const auto& values = instance.initial_state.values;
    if (first.rfind("ask_oracle ", 0) == 0) {
        return is_disambiguating(after_prefix, values, parse_oracle_query(first.substr(11)));
    }
    if (first == "noop" || first.rfind("ask_", 0) == 0) return false;
    return is_disambiguating(after_prefix, values, parse_action(first));
}

// Suites --------------------------------------------------------------------------

namespace {

template <class T>
T param(const nlohmann::json& p, const char* key, T fallback) {
    return p.contains(key) ? p.at(key).get<T>() : fallback;
}

SessionSpec domain_session(DomainSpec spec, const nlohmann::json& p, std::uint64_t seed) {
    SessionSpec s;
    s.instance_count = param(p, "instances", 1);
    s.shared_gamma = param(p, "gamma", spec.defaults.gamma);
    s.seed = seed;
    s.domain = std::make_shared<const DomainSpec>(std::move(spec));
    return s;
}

} // namespace

std::vector<ProblemInstance> family_instances(const SuiteFamily& family, std::uint64_t seed,
                                              const std::filesystem::path& base_dir, std::vector<Evidence>* prefix) {
    const auto& p = family.params;
    const auto& f = family.family;
    try {
        if (f == "explore_exploit") {
            return sample_session(gen_explore_exploit(param(p, "instances", 5), param(p, "oracle_cost", 0.5), seed));
        }
        if (f == "blicket") {
            std::set<BlicketLaw> laws;
            for (const auto& l : param(p, "laws", std::vector<std::string>{"or"})) laws.insert(parse_law(l));
            auto spec = gen_blicket(param(p, "objects", 3), laws, seed);
            spec.persistent_rules = param(p, "persistent", true);
            return sample_session(domain_session(std::move(spec), p, seed));
        }
        if (f == "boxes") {
            auto spec = gen_boxes(param(p, "boxes", 2), seed, param(p, "chained", true), param(p, "rules_known", false));
            return sample_session(domain_session(std::move(spec), p, seed));
        }
        if (f == "domain") {
            auto spec = load_domain(base_dir / p.at("path").get<std::string>());
            return sample_session(domain_session(std::move(spec), p, seed));
        }
        if (f == "session") {
            std::ifstream in(base_dir / p.at("path").get<std::string>());
            if (!in) throw Error("cannot read session " + p.at("path").get<std::string>());
            auto s = session_from_json(nlohmann::json::parse(in), base_dir);
            s.seed = seed;
            return sample_session(s);
        }
        if (f == "confounded") {
            auto task = gen_confounded(seed);
            auto model = Model::build(std::make_shared<const DomainSpec>(task.domain), task.domain.objects);
            auto inst = ground_instance(model, task.true_hypothesis, task.domain.goals.front().goal, seed);
            inst.id = "confounded";
            if (prefix) *prefix = task.prefix;
            return {inst};
        }
        if (f == "epistemic_battery") return {};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("families/" + family.name, e.what());
    }
    throw ParseError("families/" + family.name, "unknown family \"" + f + "\"");
}

SuiteConfig suite_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    SuiteConfig c;
    c.base_dir = base_dir;
    try {
        c.name = j.value("name", c.name);
        for (const auto& a : j.at("agents")) c.agents.push_back(parse_agent_kind(a.get<std::string>()));
        const auto& seeds = j.at("seeds");
        if (seeds.is_array()) {
            for (const auto& s : seeds) c.seeds.push_back(s.get<std::uint64_t>());
        } else {
            const auto start = seeds.value("start", std::uint64_t{0});
            const auto count = seeds.at("count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(start + i);
        }
        for (const auto& f : j.at("families")) {
            SuiteFamily fam;
            fam.family = f.at("family").get<std::string>();
            fam.name = f.value("name", fam.family);
            fam.params = f.value("params", nlohmann::json::object());
            c.families.push_back(std::move(fam));
        }
        if (j.contains("agent_config")) c.options.config = agent_config_from_json(j.at("agent_config"));
        c.options.reasoner = j.value("reasoner", c.options.reasoner);
        c.options.user_policy = j.value("user_policy", c.options.user_policy);
        c.options.patience = j.value("patience", c.options.patience);
        c.options.disclose_goal = j.value("disclose_goal", c.options.disclose_goal);
        c.options.oracle.epsilon = j.value("oracle_epsilon", 0.0);
        c.threads = j.value("threads", 0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("suite", e.what());
    }
    if (c.agents.empty()) throw ValidationError("suite lists no agents");
    if (c.families.empty()) throw ValidationError("suite lists no families");
    static const std::set<std::string> known{"blicket",  "boxes",   "confounded", "domain",
                                             "epistemic_battery", "explore_exploit", "session"};
    std::set<std::string> names;
    for (const auto& f : c.families) {
        if (!known.count(f.family)) throw ParseError("families/" + f.name, "unknown family \"" + f.family + "\"");
        if (!names.insert(f.name).second) throw ValidationError("duplicate family name \"" + f.name + "\"");
    }
    validate(c.options.config);
    return c;
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j{{"agent", r.agent},
                     {"family", r.family},
                     {"sessions", r.sessions},
                     {"objective", r.objective},
                     {"session_objectives", r.session_objectives},
                     {"per_instance_return", r.per_instance_return},
                     {"queries_per_instance", r.queries_per_instance},
                     {"beta_total", r.beta_total},
                     {"regret_vs_omniscient", r.regret_vs_omniscient}};
    if (r.battery_scores) j["battery_scores"] = *r.battery_scores;
    if (r.split_rate) j["split_rate"] = *r.split_rate;
    return j;
}

namespace {

void run_cell(SuiteCell& cell, const SuiteConfig& config, const SuiteFamily& family) {
    if (family.family == "epistemic_battery") {
        cell.battery = battery_scores(cell.agent, cell.seed);
        return;
    }
    std::vector<Evidence> prefix;
    auto instances = family_instances(family, cell.seed, config.base_dir, &prefix);
    auto options = config.options;
    options.kind = cell.agent;
    options.prefix = prefix;
    cell.session = run_session(instances, options);
    cell.objective = compute_objective(cell.session);
    cell.regret = cell.agent == AgentKind::Omniscient ? 0.0 : regret_vs_omniscient(cell.session, instances, options);
    if (family.family == "confounded") {
        auto [graph, posterior] = create_graph(instances.front().model);
        for (const auto& ev : prefix) posterior = update(posterior, ev);
        cell.splits = first_refinement_splits(cell.session.episodes.back(), posterior, instances.front());
    }
}

MetricsReport reduce(const std::vector<const SuiteCell*>& cells) {
    MetricsReport r;
    r.agent = std::string(to_string(cells.front()->agent));
    r.family = cells.front()->family;
    r.sessions = static_cast<int>(cells.size());
    std::vector<int> counts;
    double regret = 0.0;
    int splits = 0;
    bool any_split = false;
    for (const auto* c : cells) {
        r.session_objectives.push_back(c->objective);
        r.objective += c->objective;
        regret += c->regret;
        for (const auto& e : c->session.episodes) {
            for (const auto& s : e.steps) r.beta_total += s.beta;
        }
        const auto curve = amortization_curve(c->session);
        for (std::size_t i = 0; i < curve.size(); ++i) {
            if (r.per_instance_return.size() <= i) {
                r.per_instance_return.push_back(0.0);
                r.queries_per_instance.push_back(0.0);
                counts.push_back(0);
            }
            r.per_instance_return[i] += curve[i].episode_return;
            r.queries_per_instance[i] += curve[i].queries;
            ++counts[i];
        }
        if (c->battery) {
            if (!r.battery_scores) r.battery_scores = std::vector<double>(c->battery->size(), 0.0);
            for (std::size_t i = 0; i < c->battery->size(); ++i) (*r.battery_scores)[i] += (*c->battery)[i];
        }
        if (c->splits) {
            any_split = true;
            splits += *c->splits ? 1 : 0;
        }
    }
    const double n = static_cast<double>(cells.size());
    r.objective /= n;
    r.regret_vs_omniscient = regret / n;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        r.per_instance_return[i] /= counts[i];
        r.queries_per_instance[i] /= counts[i];
    }
    if (r.battery_scores) {
        for (auto& s : *r.battery_scores) s /= n;
    }
    if (any_split) r.split_rate = splits / n;
    return r;
}

} // namespace

SuiteResult run_suite(const SuiteConfig& config, const std::filesystem::path& out_dir) {
    std::map<std::string, const SuiteFamily*> families;
    for (const auto& f : config.families) families[f.name] = &f;
    std::vector<AgentKind> agents = config.agents;
    std::sort(agents.begin(), agents.end(), [](AgentKind a, AgentKind b) { return to_string(a) < to_string(b); });
    agents.erase(std::unique(agents.begin(), agents.end()), agents.end());
    std::vector<std::uint64_t> seeds = config.seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    SuiteResult result;
    for (auto a : agents) {
        for (const auto& [name, f] : families) {
            for (auto s : seeds) result.cells.push_back({a, name, s, {}, 0.0, 0.0, std::nullopt, std::nullopt, ""});
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) {
            auto& cell = result.cells[i];
            try {
                run_cell(cell, config, *families.at(cell.family));
                if (!out_dir.empty() && families.at(cell.family)->family != "epistemic_battery") {
                    auto dir = out_dir / std::string(to_string(cell.agent)) / cell.family;
                    std::filesystem::create_directories(dir);
                    write_session(cell.session, dir / ("seed-" + std::to_string(cell.seed) + ".jsonl"));
                }
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(result.cells.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& cell : result.cells) {
        if (!cell.error.empty()) {
            throw Error(std::string(to_string(cell.agent)) + "/" + cell.family + "/seed-" + std::to_string(cell.seed) +
                        ": " + cell.error);
        }
    }

    for (std::size_t i = 0; i < result.cells.size();) {
        std::vector<const SuiteCell*> group;
        std::size_t j = i;
        for (; j < result.cells.size() && result.cells[j].agent == result.cells[i].agent &&
               result.cells[j].family == result.cells[i].family;
             ++j) {
            group.push_back(&result.cells[j]);
        }
        result.rows.push_back(reduce(group));
        i = j;
    }

    result.report = {{"suite", config.name}, {"seeds", seeds}, {"rows", nlohmann::json::array()}};
    for (const auto& r : result.rows) result.report["rows"].push_back(to_json(r));
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir / "report.json", std::ios::binary);
        if (!out) throw Error("cannot write " + (out_dir / "report.json").string());
        out << result.report.dump(2) << '\n';
    }
    return result;
}

} // namespace scoop

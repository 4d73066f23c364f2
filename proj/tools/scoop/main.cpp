#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "scoop/harness.hpp"
#include "scoop/tasks.hpp"

namespace fs = std::filesystem;
using namespace scoop;

namespace {

int cmd_validate(const std::string& path) {
    nlohmann::json out{{"file", path}};
    try {
        const auto spec = load_domain(path);
        const auto report = validate_domain(spec);
        out["ok"] = report.ok();
        auto issues = nlohmann::json::array();
        for (const auto& v : report.violations) issues.push_back({{"element", v.element}, {"message", v.message}});
        out["violations"] = issues;
        std::cout << out.dump(2) << '\n';
        return report.ok() ? 0 : 1;
    } catch (const ParseError& e) {
        out["ok"] = false;
        out["violations"] = nlohmann::json::array({{{"element", e.where()}, {"message", e.message()}}});
        std::cout << out.dump(2) << '\n';
        return 1;
    }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << canonical_dump(j);
    std::cout << path.string() << '\n';
}

struct GenArgs {
    std::string family;
    int objects = 3;
    std::vector<std::string> laws{"or"};
    int boxes = 2;
    bool unchained = false;
    bool rules_known = false;
    int instances = 5;
    double oracle_cost = 0.5;
    std::uint64_t seed = 0;
    std::string out = ".";
};

int cmd_gen(const GenArgs& a) {
    const fs::path dir = a.out;
    fs::create_directories(dir);
    const std::string stem = a.family + "-" + std::to_string(a.seed);
    if (a.family == "blicket") {
        std::set<BlicketLaw> laws;
        for (const auto& l : a.laws) laws.insert(parse_law(l));
        write_json(dir / (stem + ".json"), to_json(gen_blicket(a.objects, laws, a.seed)));
    } else if (a.family == "boxes") {
        write_json(dir / (stem + ".json"), to_json(gen_boxes(a.boxes, a.seed, !a.unchained, a.rules_known)));
    } else if (a.family == "explore_exploit") {
        write_json(dir / (stem + ".session.json"), to_json(gen_explore_exploit(a.instances, a.oracle_cost, a.seed)));
    } else if (a.family == "confounded") {
        auto task = gen_confounded(a.seed);
        write_json(dir / (stem + ".json"), to_json(task.domain));
        auto model = Model::build(task.domain);
        auto prefix = nlohmann::json::array();
        for (const auto& ev : task.prefix) prefix.push_back(describe(ev, *model));
        write_json(dir / (stem + ".prefix.json"), {{"domain", stem + ".json"},
                                                    {"true_hypothesis", task.true_hypothesis},
                                                    {"pair", {task.pair_a, task.pair_b}},
                                                    {"prefix", prefix}});
    } else if (a.family == "epistemic_battery") {
        auto items = nlohmann::json::array();
        for (const auto& item : gen_epistemic_battery(a.seed)) {
            nlohmann::json j{{"id", item.id}, {"posterior", to_json(item.posterior)},
                             {"true_hypothesis", item.true_hypothesis}};
            if (item.kind == BatteryItem::Kind::Query) {
                j["kind"] = "query";
                j["best_query"] = item.best_query ? to_string(*item.best_query) : "";
                j["best_gain"] = item.best_gain;
            } else {
                j["kind"] = "counterfactual";
                j["question"] = item.question;
                j["answer"] = item.answer;
            }
            items.push_back(std::move(j));
        }
        write_json(dir / (stem + ".json"), items);
    } else {
        throw ParseError("gen", "unknown family \"" + a.family + "\"");
    }
    return 0;
}

std::vector<ProblemInstance> instances_from(const std::string& domain, int count, std::uint64_t seed) {
    SessionSpec s;
    s.domain = std::make_shared<const DomainSpec>(load_domain(domain));
    s.instance_count = count;
    s.seed = seed;
    s.shared_gamma = s.domain->defaults.gamma;
    return sample_session(s);
}

struct RunArgs {
    std::string domain;
    int session = 1;
    std::string agent = "causal";
    std::uint64_t seed = 0;
    std::string reasoner = "scripted";
    std::string user_policy = "passive";
    double budget = 0.0;
    bool ask_goal = false;
    std::string out;
};

int cmd_run(const RunArgs& a) {
    auto instances = instances_from(a.domain, a.session, a.seed);
    SessionRunOptions opt;
    opt.kind = parse_agent_kind(a.agent);
    opt.reasoner = a.reasoner;
    opt.user_policy = a.user_policy;
    opt.config.budget = a.budget;
    opt.disclose_goal = !a.ask_goal;
    const auto session = run_session(instances, opt);
    nlohmann::json summary{{"agent", a.agent},
                           {"objective", compute_objective(session)},
                           {"regret_vs_omniscient", regret_vs_omniscient(session, instances, opt)}};
    auto curve = nlohmann::json::array();
    double beta = 0.0;
    for (const auto& p : amortization_curve(session)) {
        curve.push_back({{"instance", p.instance_id}, {"return", p.episode_return}, {"queries", p.queries}});
    }
    for (const auto& e : session.episodes) beta += e.beta_sum();
    summary["episodes"] = curve;
    summary["beta_total"] = beta;
    if (a.out.empty()) {
        std::cout << nlohmann::json{{"type", "session"}, {"gamma", session.gamma}, {"episodes", session.episodes.size()}}.dump()
                  << '\n';
        for (const auto& e : session.episodes) write_jsonl(e, std::cout);
        std::cerr << summary.dump() << '\n';
    } else {
        write_session(session, a.out);
        std::cout << summary.dump(2) << '\n';
    }
    return 0;
}

int cmd_eval(const std::string& config_path, std::string out) {
    std::ifstream in(config_path);
    if (!in) throw Error("cannot read " + config_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(config_path, e.what());
    }
    const fs::path base = fs::path(config_path).parent_path();
    auto config = suite_from_json(j, base);
    if (out.empty()) out = (base / j.value("output", std::string("results"))).string();
    auto result = run_suite(config, out);
    std::cout << result.report.dump(2) << '\n';
    return 0;
}

int cmd_repl(const std::string& domain, const std::string& agent, std::uint64_t seed, int session) {
    auto instances = instances_from(domain, session, seed);
    HumanChannel human{&std::cin, &std::cout};
    SessionRunOptions opt;
    opt.kind = parse_agent_kind(agent);
    opt.human = &human;
    opt.disclose_goal = false;
    std::cout << "you are the user. the agent will ask for your goal; answer with \"goal: feature(args)=value\".\n";
    for (const auto& inst : instances) {
        std::cout << "instance " << inst.id << ": your goal is " << inst.user_goal.str() << "\n";
    }
    const auto trace = run_session(instances, opt);
    for (const auto& e : trace.episodes) {
        std::cout << e.instance_id << ": " << e.outcome << (e.answer.empty() ? "" : " (" + e.answer + ")") << ", "
                  << e.length() << " steps, " << e.oracle_queries() << " oracle queries\n";
    }
    std::cout << "objective " << compute_objective(trace) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scoop: causal helper-agent simulator"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a domain specification");
    validate->add_option("domain", validate_path)->required();

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a task family");
    gen->add_option("family", gen_args.family, "blicket | boxes | explore_exploit | confounded | epistemic_battery")
        ->required();
    gen->add_option("--objects", gen_args.objects);
    gen->add_option("--laws", gen_args.laws)->delimiter(',');
    gen->add_option("--boxes", gen_args.boxes);
    gen->add_flag("--unchained", gen_args.unchained);
    gen->add_flag("--rules-known", gen_args.rules_known);
    gen->add_option("--instances", gen_args.instances);
    gen->add_option("--oracle-cost", gen_args.oracle_cost);
    gen->add_option("--seed", gen_args.seed);
    gen->add_option("-o,--out", gen_args.out);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run one session and emit its trace");
    run->add_option("--domain", run_args.domain)->required();
    run->add_option("--session", run_args.session, "instances in the session");
    run->add_option("--agent", run_args.agent)->check(CLI::IsMember({"baseline", "causal", "planner", "omniscient"}));
    run->add_option("--seed", run_args.seed);
    run->add_option("--reasoner", run_args.reasoner)->check(CLI::IsMember({"scripted", "external"}));
    run->add_option("--user", run_args.user_policy)->check(CLI::IsMember(user_policies()));
    run->add_option("--budget", run_args.budget, "free-exploration allowance");
    run->add_flag("--ask-goal", run_args.ask_goal, "withhold the goal from the prompt");
    run->add_option("-o,--out", run_args.out, "trace file (default: stdout)");

    std::string eval_config;
    std::string eval_out;
    auto* eval = app.add_subcommand("eval", "run an evaluation suite");
    eval->add_option("--config", eval_config)->required();
    eval->add_option("-o,--out", eval_out);

    std::string repl_domain;
    std::string repl_agent = "causal";
    std::uint64_t repl_seed = 0;
    int repl_session = 1;
    auto* repl = app.add_subcommand("repl", "play the user against an agent");
    repl->add_option("--domain", repl_domain)->required();
    repl->add_option("--agent", repl_agent)->check(CLI::IsMember({"baseline", "causal", "planner", "omniscient"}));
    repl->add_option("--seed", repl_seed);
    repl->add_option("--session", repl_session);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*validate) return cmd_validate(validate_path);
        if (*gen) return cmd_gen(gen_args);
        if (*run) return cmd_run(run_args);
        if (*eval) return cmd_eval(eval_config, eval_out);
        if (*repl) return cmd_repl(repl_domain, repl_agent, repl_seed, repl_session);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

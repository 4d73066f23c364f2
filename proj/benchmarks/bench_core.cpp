#include <benchmark/benchmark.h>

#include "scoop/agent.hpp"
#include "scoop/harness.hpp"
#include "scoop/tasks.hpp"

using namespace scoop;

namespace {

std::shared_ptr<const Model> blicket_model(int n) {
    return Model::build(gen_blicket(n, {BlicketLaw::Or, BlicketLaw::And}));
}

void BM_Update(benchmark::State& st) {
    const auto model = blicket_model(static_cast<int>(st.range(0)));
    const auto [graph, prior] = create_graph(model);
    const auto& m = *model;
    const Values s = m.initial_values();
    const auto a = *m.action_index("place(o1)");
    InterventionResult ev{{a}, observable_readings(m, s), observable_readings(m, m.successors(m.with_hidden(s, 1), a, 1).front().next)};
    for (auto _ : st) benchmark::DoNotOptimize(update(prior, ev));
    st.counters["hypotheses"] = static_cast<double>(prior.support.size());
}
BENCHMARK(BM_Update)->DenseRange(2, 5);

void BM_EstimateRefinement(benchmark::State& st) {
    const auto model = blicket_model(static_cast<int>(st.range(0)));
    const auto inst = ground_instance(model, model->hypotheses()[1].id, model->spec().goals[0].goal, 0);
    const auto [graph, prior] = create_graph(model);
    const Values s = model->project(inst.initial_state.values);
    for (auto _ : st) benchmark::DoNotOptimize(estimate_refinement(prior, graph, s, inst, AgentConfig{}));
}
BENCHMARK(BM_EstimateRefinement)->DenseRange(2, 4);

void BM_ValueIterate(benchmark::State& st) {
    auto spec = std::make_shared<const DomainSpec>(gen_boxes(static_cast<int>(st.range(0))));
    const auto inst = ground_instance(spec, spec->objects, "loose", parse_goal("accessible(item_b)"), 0);
    const auto [graph, prior] = create_graph(inst.model);
    const auto mdp = induce_mdp(prior, inst.model->project(inst.initial_state.values), inst);
    for (auto _ : st) benchmark::DoNotOptimize(value_iterate(mdp));
    st.counters["states"] = static_cast<double>(mdp.size());
}
BENCHMARK(BM_ValueIterate)->DenseRange(1, 4);

void BM_Session(benchmark::State& st) {
    const auto spec = gen_explore_exploit(5, 0.5, 7);
    const auto instances = sample_session(spec);
    SessionRunOptions opts;
    opts.kind = AgentKind::Causal;
    for (auto _ : st) benchmark::DoNotOptimize(run_session(instances, opts));
}
BENCHMARK(BM_Session)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();

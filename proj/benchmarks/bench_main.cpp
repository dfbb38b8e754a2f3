#include <benchmark/benchmark.h>

#include <random>

#include "dtap/observation.hpp"
#include "dtap/policies.hpp"
#include "dtap/stats.hpp"

namespace {

using namespace dtap;

// Two activities, four resources, each fast at one activity.
std::shared_ptr<const DtapInstance> bench_instance() {
  DtapInstance inst;
  inst.labels = {{0, "Start", LabelKind::start}, {1, "A", LabelKind::regular}, {2, "B", LabelKind::regular},
                 {3, "End", LabelKind::end}};
  for (int r = 0; r < 4; ++r) inst.resources.push_back({r, "r" + std::to_string(r), 1});
  for (LabelId l = 1; l <= 2; ++l) {
    for (ResourceId r = 0; r < 4; ++r) {
      inst.pools.push_back({l, r});
      const bool fast = (l == 1) == (r < 2);
      inst.completion.push_back({fast ? 0.5 : 3.0, fast ? 0.1 : 0.6});
    }
  }
  inst.transitions.rows = {{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}};
  inst.calendar.expected_active.assign(kWeekHours, 4);
  inst.arrival_rate = 1.2;
  inst.horizon_hours = 168.0;
  return std::make_shared<const DtapInstance>(std::move(inst));
}

void BM_EpisodeSpt(benchmark::State& state) {
  const auto inst = bench_instance();
  SptPolicy spt;
  std::uint64_t seed = 0;
  std::int64_t decisions = 0;
  for (auto _ : state) {
    const auto run = run_episode(inst, spt, seed++, {});
    decisions += run.summary.decisions;
    benchmark::DoNotOptimize(run.summary.total_reward);
  }
  state.counters["decisions/s"] = benchmark::Counter(static_cast<double>(decisions), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EpisodeSpt);

void BM_EpisodeRandom(benchmark::State& state) {
  const auto inst = bench_instance();
  RandomPolicy policy;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(inst, policy, seed++, {}).summary.total_reward);
}
BENCHMARK(BM_EpisodeRandom);

void BM_BuildObservation(benchmark::State& state) {
  const auto inst = bench_instance();
  Simulation sim(inst, 3);
  SptPolicy spt;
  // Advance to a busy mid-episode decision point.
  for (int i = 0; i < 100; ++i) {
    auto step = sim.step_until_decision();
    if (std::holds_alternative<EpisodeEnd>(step)) break;
    sim.apply_assignment(spt.decide(std::get<DecisionPoint>(step), sim).chosen);
  }
  for (auto _ : state) {
    auto graph = standardize_features(build_observation(sim.state(), *inst));
    benchmark::DoNotOptimize(graph.mask.data());
  }
}
BENCHMARK(BM_BuildObservation);

void BM_Welch(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& x : a) x = d(rng);
  for (auto& x : b) x = d(rng) + 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(welch_t_test(a, b).p);
}
BENCHMARK(BM_Welch)->Arg(200)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "dtap/bench.hpp"
#include "dtap/miner.hpp"
#include "dtap/observation.hpp"
#include "dtap/reference_agent.hpp"
#include "dtap/remote.hpp"
#include "dtap/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace dtap;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and sizes.
constexpr std::uint64_t kAuditSeeds = 100;
constexpr std::size_t kObservationStates = 1000;
constexpr double kShareSumTol = 1e-12;
constexpr double kStandardizeTol = 1e-12;
constexpr std::size_t kDirectionalReps = 200;
constexpr double kWeekHorizon = 168.0;
constexpr double kFourWeekHorizon = 28.0 * 24.0;
constexpr double kSignificance = 1e-2;
constexpr std::size_t kHorizonReps = 50;
constexpr std::size_t kMinRoundTripCases = 5000;
constexpr double kMeanRelTol = 0.05;
constexpr std::size_t kMinPoolSamples = 50;
constexpr double kTransitionAbsTol = 0.03;
constexpr double kRateRelTol = 0.05;
constexpr int kCalendarTol = 1;
constexpr std::size_t kWellSampledHour = 20;
constexpr double kWelchTol = 1e-9;
constexpr int kWelchPairs = 50;
constexpr std::size_t kAgreementSamples = 10000;
constexpr double kFourChoiceExpected = 0.25;
constexpr double kFourChoiceTol = 0.02;
constexpr std::size_t kProtocolDecisions = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

const char* const kPolicies[] = {"random", "fifo", "spt"};

std::vector<NamedInstance> audit_suite() {
  return {{"toy", testing::share(testing::toy_two_label())},
          {"fig5", testing::share(testing::fig5())},
          {"heterogeneous", testing::share(testing::heterogeneous())}};
}

Outcome reward_audit() {
  std::size_t episodes = 0, failures = 0;
  double worst = 0.0;
  for (const auto& inst : audit_suite()) {
    for (const char* name : kPolicies) {
      for (std::uint64_t seed = 0; seed < kAuditSeeds; ++seed) {
        auto policy = make_builtin_policy(name);
        const auto run = run_episode(inst.instance, *policy, seed, {});
        const auto audit = audit_theorem1(run.summary);
        ++episodes;
        failures += !audit.passed;
        worst = std::max(worst, audit.residual / std::max(1.0, run.summary.sum_cycles));
      }
    }
  }
  return {failures == 0, fmt("%zu episodes, %zu over tolerance, worst relative residual %.3g", episodes, failures, worst)};
}

Outcome invariants() {
  EngineConfig config;
  config.check_invariants = true;
  std::size_t episodes = 0;
  std::int64_t violations = 0;
  std::string first;
  for (const auto& inst : audit_suite()) {
    for (const char* name : kPolicies) {
      for (std::uint64_t seed = 0; seed < kAuditSeeds; ++seed) {
        auto policy = make_builtin_policy(name);
        const auto run = run_episode(inst.instance, *policy, seed, config);
        ++episodes;
        violations += run.invariant_violations;
        if (first.empty() && !run.violation_messages.empty()) first = run.violation_messages.front();
      }
    }
  }
  return {violations == 0,
          fmt("%zu episodes checked after every transition, %lld violations%s%s", episodes,
              static_cast<long long>(violations), first.empty() ? "" : ": ", first.c_str())};
}

Outcome observation() {
  std::size_t mask_mismatch = 0, edge_mismatch = 0, share_bad = 0, standardize_bad = 0, decision_states = 0;
  for (std::uint64_t i = 0; i < kObservationStates; ++i) {
    const auto inst = testing::random_instance(i % 250);
    const auto state = testing::random_state(inst, 1000 + i);
    const auto graph = build_observation(state, inst);
    auto sim = Simulation::from_state(testing::share(inst), state);
    const auto feasible = sim.feasible_pairs();
    decision_states += !feasible.empty();

    std::vector<PoolPair> masked;
    for (std::size_t j = 0; j < graph.mask.size(); ++j) {
      const auto& p = graph.assign_pairs[j];
      // Edge condition read straight off the state: resource free and on duty, label has waiting cases.
      const bool edge = state.active_resources.contains(p.resource) && !state.queues[p.label].empty();
      const bool has_res_edge = std::count(graph.edges_res.begin(), graph.edges_res.end(),
                                           std::pair<int, int>{p.resource, static_cast<int>(j)}) == 1;
      const bool has_act_edge = std::count(graph.edges_act.begin(), graph.edges_act.end(),
                                           std::pair<int, int>{p.label, static_cast<int>(j)}) == 1;
      edge_mismatch += edge != (graph.mask[j] == 1) || has_res_edge != edge || has_act_edge != edge;
      if (graph.mask[j]) masked.push_back(p);
    }
    mask_mismatch += masked != feasible;

    if (!state.active_cases.empty()) {
      double sum = 0.0;
      for (double x : graph.activity_feat) sum += x;
      share_bad += std::abs(sum - 1.0) > kShareSumTol;
    }

    const auto once = standardize_features(graph);
    const auto twice = standardize_features(once);
    const auto check = [&](const std::vector<double>& raw, const std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t x = 0; x < raw.size(); ++x) {
        if (std::abs(a[x] - b[x]) > kStandardizeTol) return false;
        for (std::size_t y = 0; y < raw.size(); ++y) {
          // Strict order is kept unless the whole vector collapsed to zero.
          if (raw[x] < raw[y] && !(a[x] < a[y])) {
            bool collapsed = true;
            for (double v : a) collapsed = collapsed && v == 0.0;
            if (!collapsed) return false;
          }
          if (raw[x] == raw[y] && a[x] != a[y]) return false;
        }
      }
      return true;
    };
    standardize_bad += !check(graph.resource_feat, once.resource_feat, twice.resource_feat) ||
                       !check(graph.activity_feat, once.activity_feat, twice.activity_feat) ||
                       !check(graph.assign_feat, once.assign_feat, twice.assign_feat);
  }
  const bool pass = mask_mismatch == 0 && edge_mismatch == 0 && share_bad == 0 && standardize_bad == 0;
  return {pass, fmt("%zu states (%zu with a decision): mask/feasible mismatches %zu, edge mismatches %zu, "
                    "share sums off %zu, standardization failures %zu",
                    kObservationStates, decision_states, mask_mismatch, edge_mismatch, share_bad, standardize_bad)};
}

std::vector<double> cycles(const std::shared_ptr<const DtapInstance>& inst, const char* policy, std::size_t reps,
                           double horizon) {
  ReplicationOptions o;
  o.replications = reps;
  o.base_seed = 1;
  o.horizon_hours = horizon;
  o.threads = std::max(1u, std::thread::hardware_concurrency());
  return mean_cycles(run_replications(inst, builtin_policy_factory(policy), o));
}

Outcome directional() {
  const auto inst = testing::share(testing::heterogeneous());
  const auto spt = cycles(inst, "spt", kDirectionalReps, kWeekHorizon);
  const auto fifo = cycles(inst, "fifo", kDirectionalReps, kWeekHorizon);
  const auto rnd = cycles(inst, "random", kDirectionalReps, kWeekHorizon);
  const auto s = sample_stats(spt), f = sample_stats(fifo), r = sample_stats(rnd);
  const auto vs_fifo = welch_t_test(spt, fifo, kSignificance);
  const auto vs_rnd = welch_t_test(spt, rnd, kSignificance);
  const bool pass = s.mean < f.mean && s.mean < r.mean && vs_fifo.p < kSignificance && vs_rnd.p < kSignificance;
  return {pass, fmt("SPT %.2f +- %.2f h, FIFO %.2f +- %.2f h, Random %.2f +- %.2f h; p(SPT,FIFO)=%.2g p(SPT,Random)=%.2g",
                    s.mean, s.std_dev, f.mean, f.std_dev, r.mean, r.std_dev, vs_fifo.p, vs_rnd.p)};
}

Outcome horizon() {
  const auto inst = testing::share(testing::overloaded());
  const auto week = sample_stats(cycles(inst, "spt", kHorizonReps, kWeekHorizon));
  const auto month = sample_stats(cycles(inst, "spt", kHorizonReps, kFourWeekHorizon));
  return {month.mean >= week.mean, fmt("SPT mean cycle 7 days %.2f h, 28 days %.2f h", week.mean, month.mean)};
}

Outcome miner_round_trip() {
  const auto source = testing::roundtrip_source();
  EngineConfig config;
  config.record_activity_log = true;
  RandomPolicy policy;
  std::ostringstream csv;
  std::int64_t cases = 0;
  run_episode(testing::share(source), policy, 11, config, [&](const Simulation& sim) {
    write_event_log(csv, sim.activity_log(), sim.instance());
    cases = static_cast<std::int64_t>(sim.state().cases.size());
  });
  const auto log = parse_event_log_text(csv.str());
  const auto mined = assemble_instance(log).instance;
  const auto calendar = mine_calendar(log);

  std::size_t pools_checked = 0, pools_bad = 0;
  double worst_mean = 0.0;
  const auto report = mine_completion_models(log);
  for (const auto& p : report.pools) {
    if (p.count < kMinPoolSamples) continue;
    const auto label = source.find_label(p.activity);
    const auto resource = source.find_resource(p.resource);
    if (!label || !resource) {
      ++pools_bad;
      continue;
    }
    const double truth = source.completion_of({*label, *resource}).mean;
    const double rel = std::abs(p.mean - truth) / truth;
    worst_mean = std::max(worst_mean, rel);
    ++pools_checked;
    pools_bad += rel > kMeanRelTol;
  }

  double worst_p = 0.0;
  bool labels_ok = mined.labels.size() == source.labels.size();
  for (const auto& from : source.labels) {
    for (const auto& to : source.labels) {
      const auto mf = mined.find_label(from.name), mt = mined.find_label(to.name);
      if (!mf || !mt) {
        labels_ok = false;
        continue;
      }
      const double truth = source.transitions.rows[from.id][to.id];
      const double got = mined.transitions.rows[*mf][*mt];
      worst_p = std::max(worst_p, std::abs(got - truth));
    }
  }

  const double rate_rel = std::abs(mined.arrival_rate - source.arrival_rate) / source.arrival_rate;

  int worst_cal = 0;
  std::size_t hours_checked = 0;
  for (std::size_t k = 0; k < calendar.week_samples.size(); ++k) {
    if (calendar.week_samples[k] < kWellSampledHour) continue;
    ++hours_checked;
    worst_cal = std::max(worst_cal, std::abs(calendar.calendar.expected_active[k] - source.calendar.expected_active[k]));
  }

  const bool pass = cases >= static_cast<std::int64_t>(kMinRoundTripCases) && labels_ok && pools_checked > 0 &&
                    pools_bad == 0 && worst_p <= kTransitionAbsTol && rate_rel <= kRateRelTol && hours_checked > 0 &&
                    worst_cal <= kCalendarTol;
  return {pass, fmt("%lld cases; %zu pools checked, worst mean error %.2f%%; worst transition error %.4f; "
                    "lambda %.4f vs %.4f (%.2f%%); %zu hours checked, worst calendar error %d",
                    static_cast<long long>(cases), pools_checked, 100 * worst_mean, worst_p, mined.arrival_rate,
                    source.arrival_rate, 100 * rate_rel, hours_checked, worst_cal)};
}

Outcome welch_oracle() {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  const auto small = welch_t_test(a, b);
  bool pass = std::abs(small.t - -1.2247448713915890) < 1e-4 && std::abs(small.dof - 4.0) < kWelchTol;
  std::mt19937_64 rng(77);
  double worst_t = 0.0, worst_dof = 0.0;
  for (int i = 0; i < kWelchPairs; ++i) {
    std::normal_distribution<double> da(std::uniform_real_distribution<double>(-5, 5)(rng),
                                        std::uniform_real_distribution<double>(0.1, 4)(rng));
    std::normal_distribution<double> db(std::uniform_real_distribution<double>(-5, 5)(rng),
                                        std::uniform_real_distribution<double>(0.1, 4)(rng));
    std::vector<double> xs(std::uniform_int_distribution<int>(2, 60)(rng));
    std::vector<double> ys(std::uniform_int_distribution<int>(2, 60)(rng));
    for (auto& x : xs) x = da(rng);
    for (auto& y : ys) y = db(rng);
    const auto got = welch_t_test(xs, ys);
    const auto ref = testing::welch_reference(xs, ys);
    worst_t = std::max(worst_t, std::abs(got.t - ref.t) / std::max(1.0, std::abs(ref.t)));
    worst_dof = std::max(worst_dof, std::abs(got.dof - ref.dof) / std::max(1.0, ref.dof));
  }
  pass = pass && worst_t <= kWelchTol && worst_dof <= kWelchTol;
  return {pass, fmt("(1,2,3)/(2,3,4): t=%.4f dof=%.4f; %d random pairs, worst relative error t %.2g dof %.2g", small.t,
                    small.dof, kWelchPairs, worst_t, worst_dof)};
}

Outcome agreement() {
  AgreementOptions o;
  o.samples = kAgreementSamples;
  o.seed = 5;
  SptPolicy s1, s2;
  const auto self = action_agreement(testing::share(testing::toy_two_label()), s1, s2, o);
  SptPolicy driver;
  RandomPolicy random;
  const auto four = action_agreement(testing::share(testing::four_choice()), driver, random, o);
  const bool pass = self.samples == kAgreementSamples && self.fraction() == 1.0 &&
                    four.samples == kAgreementSamples &&
                    std::abs(four.fraction() - kFourChoiceExpected) <= kFourChoiceTol;
  return {pass, fmt("SPT vs SPT %.4f over %zu; SPT vs Random on four-choice %.4f over %zu", self.fraction(),
                    self.samples, four.fraction(), four.samples)};
}

Outcome protocol() {
  using namespace std::chrono_literals;
  const auto inst = testing::share(testing::toy_two_label());

  // The remote mimic drives; built-in SPT is asked at every multi-choice decision.
  AgreementResult remote_vs_spt;
  MimicReport mimic_report;
  std::string failure;
  {
    auto [server, client] = make_channel_pair();
    std::thread agent([&, ch = std::move(client)]() mutable {
      MimicOptions m;
      m.episodes = 0;
      mimic_report = run_spt_mimic(ch, m);
    });
    try {
      RemotePolicy remote(std::move(server), 10s);
      SptPolicy spt;
      AgreementOptions o;
      o.samples = kProtocolDecisions;
      o.seed = 9;
      remote_vs_spt = action_agreement(inst, remote, spt, o);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    agent.join();
  }

  // Blocked-index injection through a serving session.
  SessionReport blocked;
  MimicReport blocked_agent;
  {
    auto [server, client] = make_channel_pair();
    std::thread agent([&, ch = std::move(client)]() mutable {
      MimicOptions m;
      m.blocked_at = 5;
      blocked_agent = run_spt_mimic(ch, m);
    });
    SessionOptions s;
    s.timeout = 10s;
    blocked = serve_session(inst, server, s);
    server.close();
    agent.join();
  }
  const bool clean_abort = blocked.error == ProtocolErrorCode::PROTOCOL_BLOCKED_ACTION &&
                           blocked_agent.error_code == std::optional<std::string>("PROTOCOL_BLOCKED_ACTION") &&
                           blocked.episodes.empty();
  const bool pass = failure.empty() && remote_vs_spt.samples == kProtocolDecisions &&
                    remote_vs_spt.fraction() == 1.0 && clean_abort;
  return {pass, fmt("remote mimic vs SPT %.4f over %zu decisions%s%s; blocked index -> %s", remote_vs_spt.fraction(),
                    remote_vs_spt.samples, failure.empty() ? "" : ", error: ", failure.c_str(),
                    blocked.error ? std::string(to_string(*blocked.error)).c_str() : "no error")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"reward-audit", reward_audit},
      {"simulator-invariants", invariants},
      {"observation-correctness", observation},
      {"directional-ordering", directional},
      {"horizon-behavior", horizon},
      {"miner-round-trip", miner_round_trip},
      {"welch-oracle", welch_oracle},
      {"agreement-metric", agreement},
      {"protocol-conformance", protocol},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto started = Clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
    std::printf("%s %s: %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += !outcome.pass;
  }
  return failed == 0 ? 0 : 1;
}

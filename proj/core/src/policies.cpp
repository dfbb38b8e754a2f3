#include "dtap/policies.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace dtap {

namespace {

PolicyDecision make_decision(const DtapInstance& instance, PoolPair pair, std::string tag) {
  const auto index = instance.pool_index(pair);
  if (!index) throw InfeasibleAssignment(InfeasibleReason::not_in_pool, pair);
  return PolicyDecision{pair, *index, std::move(tag)};
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t policy_seed(std::uint64_t episode_seed, std::uint64_t stream) {
  return mix(mix(episode_seed) ^ mix(stream + 0x5eed));
}

PolicyDecision random_policy(const DecisionPoint& decision, const DtapInstance& instance, Rng& rng) {
  if (decision.feasible.empty()) throw EmptyDecisionError();
  std::uniform_int_distribution<std::size_t> dist(0, decision.feasible.size() - 1);
  return make_decision(instance, decision.feasible[dist(rng)], "random");
}

PolicyDecision fifo_policy(const DecisionPoint& decision, const SimState& state, const DtapInstance& instance) {
  if (decision.feasible.empty()) throw EmptyDecisionError();
  // Oldest case among labels that have a feasible pair.
  std::pair<double, CaseId> oldest{std::numeric_limits<double>::infinity(), std::numeric_limits<CaseId>::max()};
  LabelId label = -1;
  for (const auto& pair : decision.feasible) {
    const auto& queue = state.queues.at(pair.label);
    if (queue.empty()) continue;
    if (*queue.begin() < oldest) {
      oldest = *queue.begin();
      label = pair.label;
    }
  }
  if (label < 0) throw EmptyDecisionError();
  ResourceId resource = std::numeric_limits<ResourceId>::max();
  for (const auto& pair : decision.feasible) {
    if (pair.label == label) resource = std::min(resource, pair.resource);
  }
  return make_decision(instance, {label, resource}, "fifo:case=" + std::to_string(oldest.second));
}

PolicyDecision spt_policy(const DecisionPoint& decision, const DtapInstance& instance) {
  if (decision.feasible.empty()) throw EmptyDecisionError();
  const PoolPair* best = nullptr;
  double best_mean = std::numeric_limits<double>::infinity();
  for (const auto& pair : decision.feasible) {
    const double mean = instance.completion_of(pair).mean;
    if (best == nullptr || std::tie(mean, pair) < std::tie(best_mean, *best)) {
      best = &pair;
      best_mean = mean;
    }
  }
  return make_decision(instance, *best, "spt");
}

PolicyDecision RandomPolicy::decide(const DecisionPoint& decision, const Simulation& sim) {
  return random_policy(decision, sim.instance(), rng_);
}

void RandomPolicy::begin_episode(std::uint64_t seed) { rng_.seed(policy_seed(seed, stream_)); }

PolicyDecision FifoPolicy::decide(const DecisionPoint& decision, const Simulation& sim) {
  return fifo_policy(decision, sim.state(), sim.instance());
}

PolicyDecision SptPolicy::decide(const DecisionPoint& decision, const Simulation& sim) {
  return spt_policy(decision, sim.instance());
}

std::unique_ptr<Policy> make_builtin_policy(std::string_view name, std::uint64_t stream) {
  if (name == "random") return std::make_unique<RandomPolicy>(stream);
  if (name == "fifo") return std::make_unique<FifoPolicy>();
  if (name == "spt") return std::make_unique<SptPolicy>();
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

EpisodeRun run_episode(std::shared_ptr<const DtapInstance> instance, Policy& policy, std::uint64_t seed,
                       const EngineConfig& config, const std::function<void(const Simulation&)>& on_finish) {
  Simulation sim(std::move(instance), seed, config);
  policy.begin_episode(seed);
  while (true) {
    auto step = sim.step_until_decision();
    if (std::holds_alternative<EpisodeEnd>(step)) break;
    const auto& decision = std::get<DecisionPoint>(step);
    sim.apply_assignment(policy.decide(decision, sim).chosen);
  }
  EpisodeRun run{sim.finalize(), sim.invariant_violations(), sim.violation_messages()};
  policy.end_episode(run.summary);
  if (on_finish) on_finish(sim);
  return run;
}

}  // namespace dtap

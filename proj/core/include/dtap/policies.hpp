#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dtap/engine.hpp"

namespace dtap {

struct PolicyDecision {
  PoolPair chosen;
  std::size_t node_index = 0;
  std::string rationale_tag;
};

class EmptyDecisionError : public std::invalid_argument {
 public:
  EmptyDecisionError() : std::invalid_argument("decision point has no feasible assignments") {}
};

/// Random: uniform over the feasible pairs.
PolicyDecision random_policy(const DecisionPoint& decision, const DtapInstance& instance, Rng& rng);

/// FIFO: label of the oldest active case (ties by case id), then its lowest
/// feasible resource id.
PolicyDecision fifo_policy(const DecisionPoint& decision, const SimState& state, const DtapInstance& instance);

/// SPT: feasible pair with minimal mean completion time, ties by (label, resource).
PolicyDecision spt_policy(const DecisionPoint& decision, const DtapInstance& instance);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual PolicyDecision decide(const DecisionPoint& decision, const Simulation& sim) = 0;
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  virtual void end_episode(const EpisodeSummary& /*summary*/) {}
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t stream = 0) : stream_(stream) {}
  std::string name() const override { return "random"; }
  PolicyDecision decide(const DecisionPoint& decision, const Simulation& sim) override;
  void begin_episode(std::uint64_t seed) override;

 private:
  std::uint64_t stream_;
  Rng rng_;
};

class FifoPolicy final : public Policy {
 public:
  std::string name() const override { return "fifo"; }
  PolicyDecision decide(const DecisionPoint& decision, const Simulation& sim) override;
};

class SptPolicy final : public Policy {
 public:
  std::string name() const override { return "spt"; }
  PolicyDecision decide(const DecisionPoint& decision, const Simulation& sim) override;
};

/// "random", "fifo" or "spt"; throws std::invalid_argument otherwise.
std::unique_ptr<Policy> make_builtin_policy(std::string_view name, std::uint64_t stream = 0);

/// Seed for a policy's private generator, decorrelated from the engine's.
std::uint64_t policy_seed(std::uint64_t episode_seed, std::uint64_t stream);

struct EpisodeRun {
  EpisodeSummary summary;
  std::int64_t invariant_violations = 0;
  std::vector<std::string> violation_messages;
};

/// Runs one full episode of `instance` under `policy`.
EpisodeRun run_episode(std::shared_ptr<const DtapInstance> instance, Policy& policy, std::uint64_t seed,
                       const EngineConfig& config,
                       const std::function<void(const Simulation&)>& on_finish = {});

}  // namespace dtap

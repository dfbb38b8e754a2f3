#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dtap/model.hpp"
#include "dtap/reward.hpp"
#include "dtap/state.hpp"

namespace dtap {

struct EngineConfig {
  /// Apply the only feasible assignment internally instead of surfacing it.
  bool auto_apply_singletons = false;
  /// Use mean completion times instead of sampling.
  bool determinize = false;
  /// Check state invariants after every transition and count violations.
  bool check_invariants = false;
  bool record_trace = false;
  bool record_activity_log = false;
};

/// Lower bound on sampled completion times, in hours.
inline constexpr double kMinDuration = 1e-6;

double sample_interarrival(Rng& rng, double arrival_rate);

/// |N(mean, std)| clamped below at kMinDuration, or the mean when determinized.
/// Throws InstanceError if the pair is not in the pool set.
double sample_completion(const DtapInstance& instance, LabelId label, ResourceId resource, Rng& rng,
                         bool determinize);

/// Successive draws proportional to weight among the remaining candidates.
std::vector<ResourceId> weighted_sample_without_replacement(std::span<const ResourceId> candidates,
                                                            std::span<const int> weights,
                                                            std::size_t count, Rng& rng);

std::vector<ResourceId> uniform_sample_without_replacement(std::span<const ResourceId> candidates,
                                                           std::size_t count, Rng& rng);

struct DecisionPoint {
  std::vector<PoolPair> feasible;  // pool order
  double clock = 0.0;
  std::int64_t step = 0;
};

struct EpisodeEnd {
  double end_time = 0.0;
};

using StepResult = std::variant<DecisionPoint, EpisodeEnd>;

enum class InfeasibleReason { not_in_pool, resource_busy, resource_off, no_such_case, episode_ended };

std::string_view to_string(InfeasibleReason reason);

class InfeasibleAssignment : public std::runtime_error {
 public:
  InfeasibleAssignment(InfeasibleReason reason, PoolPair pair);
  InfeasibleReason reason() const { return reason_; }
  PoolPair pair() const { return pair_; }

 private:
  InfeasibleReason reason_;
  PoolPair pair_;
};

struct TraceRecord {
  double clock = 0.0;
  std::string event_type;
  CaseId case_id = -1;
  ResourceId resource_id = -1;
  LabelId label_id = -1;
};

/// One executed activity, as it would appear in an event log.
struct ActivityRecord {
  CaseId case_id = 0;
  LabelId label = 0;
  ResourceId resource = 0;
  double start = 0.0;
  double end = 0.0;
};

/// Discrete-event simulation of one episode. Owns its state; the instance is
/// shared read-only.
class Simulation {
 public:
  /// Episode setup: clock 0, one resource scheduling draw at hour 0, first
  /// arrival and next scheduling event enqueued.
  Simulation(std::shared_ptr<const DtapInstance> instance, std::uint64_t seed, EngineConfig config = {});

  /// Wraps a hand-built state. The ledger starts at the state's clock, so the
  /// reward audit only covers what happens afterwards.
  static Simulation from_state(std::shared_ptr<const DtapInstance> instance, SimState state,
                               EngineConfig config = {});

  /// Fires events in time order until an assignment is possible or the next
  /// event lies beyond the horizon.
  StepResult step_until_decision();

  /// Plan + Start Activity for the oldest active case with the pair's label.
  const InFlightAssignment& apply_assignment(PoolPair pair);

  std::vector<PoolPair> feasible_pairs() const;

  // Individual transitions; the engine calls these from the event loop.
  void arrive_case();
  void fire_complete_activity(ResourceId resource);
  void schedule_resources();

  bool ended() const { return end_time_.has_value(); }
  std::optional<double> end_time() const { return end_time_; }

  /// Runs truncation accounting. Requires an ended episode.
  EpisodeSummary finalize();

  const SimState& state() const { return state_; }
  const DtapInstance& instance() const { return *instance_; }
  std::shared_ptr<const DtapInstance> shared_instance() const { return instance_; }
  const EngineConfig& config() const { return config_; }
  const RewardLedger& ledger() const { return ledger_; }
  std::uint64_t seed() const { return seed_; }

  std::int64_t invariant_violations() const { return violation_count_; }
  const std::vector<std::string>& violation_messages() const { return violation_messages_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const std::vector<ActivityRecord>& activity_log() const { return activity_log_; }

 private:
  Simulation(std::shared_ptr<const DtapInstance> instance, SimState state, std::uint64_t seed,
             EngineConfig config);

  void fire(const PendingEvent& event);
  LabelId sample_next_label(LabelId from);
  void after_transition();
  void emit(const char* type, CaseId case_id, ResourceId resource, LabelId label);

  std::shared_ptr<const DtapInstance> instance_;
  SimState state_;
  std::uint64_t seed_ = 0;
  EngineConfig config_;
  RewardLedger ledger_;
  std::optional<double> end_time_;
  std::optional<EpisodeSummary> summary_;
  double last_clock_ = 0.0;

  std::int64_t violation_count_ = 0;
  std::vector<std::string> violation_messages_;
  std::vector<TraceRecord> trace_;
  std::vector<ActivityRecord> activity_log_;
};

std::string trace_csv_header();
std::string to_csv_row(const TraceRecord& record);

}  // namespace dtap

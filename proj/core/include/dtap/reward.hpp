#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dtap {

struct SimState;

/// Piecewise-constant trajectory of the number of cases in the system and the
/// per-decision rewards derived from the area under it.
class RewardLedger {
 public:
  struct Segment {
    double time;
    std::int64_t cases;
  };

  /// Closes the open segment at `time` and opens a new one with `case_count`.
  void record_transition(double time, std::int64_t case_count);

  /// Negative area accumulated since the previous decision; resets the area.
  double reward_for_decision();

  /// Closes the open segment at `end_time` and books the residual area as a
  /// final pseudo-decision. Returns that truncation reward.
  double truncate(double end_time);

  double pending_area() const { return pending_area_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<double>& rewards() const { return rewards_; }
  double total_reward() const { return total_reward_; }

 private:
  std::vector<Segment> segments_;
  double last_time_ = 0.0;  // time of the latest recorded transition
  double pending_area_ = 0.0;
  std::vector<double> rewards_;
  double total_reward_ = 0.0;
};

class LedgerError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EpisodeSummary {
  std::uint64_t seed = 0;
  double end_time = 0.0;
  double total_reward = 0.0;
  double truncation_reward = 0.0;
  std::int64_t case_count = 0;  // all cases that entered the system
  std::int64_t completed = 0;
  std::int64_t decisions = 0;
  double mean_cycle = 0.0;
  bool mean_cycle_defined = false;
  double sum_cycles = 0.0;
  std::vector<double> per_case_cycle;  // indexed by case id
};

/// Books the truncation reward and collects per-case cycle times from the case
/// timestamps. Uncompleted cases are charged `end_time - arrival`.
EpisodeSummary finalize_episode(RewardLedger& ledger, const SimState& state, double end_time);

struct AuditResult {
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

inline constexpr double kAuditRelativeTolerance = 1e-9;

/// |sum of rewards + sum of cycle times|, passing iff within 1e-9 * max(1, sum of cycles).
AuditResult audit_theorem1(const EpisodeSummary& summary);

}  // namespace dtap

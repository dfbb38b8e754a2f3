#include "dtap/reward.hpp"

#include <cmath>
#include <string>

#include "dtap/state.hpp"

namespace dtap {

void RewardLedger::record_transition(double time, std::int64_t case_count) {
  if (!segments_.empty()) {
    if (time < last_time_) {
      throw LedgerError("ledger time regression: " + std::to_string(time) + " < " + std::to_string(last_time_));
    }
    pending_area_ += static_cast<double>(segments_.back().cases) * (time - last_time_);
    last_time_ = time;
    if (segments_.back().cases == case_count) return;  // extend the open segment
  }
  last_time_ = time;
  segments_.push_back({time, case_count});
}

double RewardLedger::reward_for_decision() {
  const double reward = -pending_area_;
  pending_area_ = 0.0;
  rewards_.push_back(reward);
  total_reward_ += reward;
  return reward;
}

double RewardLedger::truncate(double end_time) {
  if (!segments_.empty()) record_transition(end_time, segments_.back().cases);
  return reward_for_decision();
}

EpisodeSummary finalize_episode(RewardLedger& ledger, const SimState& state, double end_time) {
  EpisodeSummary summary;
  summary.end_time = end_time;
  summary.decisions = state.decision_step;
  summary.truncation_reward = ledger.truncate(end_time);
  summary.total_reward = ledger.total_reward();

  summary.case_count = static_cast<std::int64_t>(state.cases.size());
  summary.per_case_cycle.reserve(state.cases.size());
  for (const auto& c : state.cases) {
    const double finish = c.status == CaseStatus::completed ? c.completion_time : end_time;
    summary.per_case_cycle.push_back(finish - c.arrival_time);
    summary.sum_cycles += summary.per_case_cycle.back();
    summary.completed += c.status == CaseStatus::completed;
  }
  summary.mean_cycle_defined = summary.case_count > 0;
  summary.mean_cycle =
      summary.mean_cycle_defined ? summary.sum_cycles / static_cast<double>(summary.case_count) : 0.0;
  return summary;
}

AuditResult audit_theorem1(const EpisodeSummary& summary) {
  AuditResult result;
  result.residual = std::abs(summary.total_reward + summary.sum_cycles);
  result.tolerance = kAuditRelativeTolerance * std::max(1.0, summary.sum_cycles);
  result.passed = result.residual <= result.tolerance;
  return result;
}

}  // namespace dtap

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtap/event_log.hpp"
#include "dtap/model.hpp"

namespace dtap {

/// A pair needs this many observations to enter the pool set.
inline constexpr std::size_t kMinPoolObservations = 2;

struct PoolEstimate {
  std::string activity;
  std::string resource;
  std::size_t count = 0;
  double mean = 0.0;     // hours
  double std_dev = 0.0;  // sample standard deviation, n - 1 denominator
};

struct CompletionEstimate {
  std::vector<PoolEstimate> pools;     // count >= 2, in order of first appearance
  std::vector<PoolEstimate> excluded;  // seen fewer than 2 times
};

/// Pools and Gaussian completion models from resourced records.
CompletionEstimate mine_completion_models(const EventLog& log);

/// Empirical next-activity probabilities over the states
/// 0 = virtual start, 1..n = `activities`, n + 1 = virtual end.
struct TransitionEstimate {
  std::vector<std::string> activities;  // order of first appearance
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::vector<double>> probs;  // end row is all zero

  std::size_t start_state() const { return 0; }
  std::size_t end_state() const { return activities.size() + 1; }
  std::optional<std::size_t> state_of(const std::string& activity) const;
};

TransitionEstimate mine_transitions(const EventLog& log);

struct CalendarEstimate {
  Calendar calendar;
  std::vector<double> mean_active;        // before rounding
  std::vector<std::size_t> week_samples;  // number of log hours that map to each hour-of-period
  std::vector<std::string> resources;     // resources counted, order of first appearance
  std::vector<int> weights;               // record counts, parallel to `resources`, at least 1
  std::vector<std::string> warnings;
};

/// Hourly availability P and resource weights V. When `only` is given, just
/// those resources are counted.
CalendarEstimate mine_calendar(const EventLog& log, int period_hours = kWeekHours,
                               const std::vector<std::string>* only = nullptr);

class MiningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// scale * cases / span. Throws MiningError on fewer than 2 cases or zero span.
double mine_arrival_rate(const EventLog& log, double scale = 1.0);

struct MiningOptions {
  double lambda_scale = 1.0;
  double horizon_hours = 168.0;
  int period_hours = kWeekHours;
};

struct MiningReport {
  std::size_t cases = 0;
  std::size_t records = 0;
  std::vector<RejectedRow> rejected;
  std::vector<PoolEstimate> pools;
  std::vector<PoolEstimate> excluded_pairs;
  std::vector<std::string> eliminated_activities;  // no pool after filtering
  std::vector<std::string> dropped_resources;      // in no pool after filtering
  std::vector<std::string> warnings;

  std::size_t label_count = 0;  // regular labels
  std::size_t resource_count = 0;
  double arrival_rate = 0.0;
  double activities_per_case_mean = 0.0;
  double activities_per_case_std = 0.0;
  double pool_size_mean = 0.0;  // resources per activity
  double pool_size_std = 0.0;
  double availability_mean = 0.0;  // expected active resources per hour
  double availability_std = 0.0;
};

struct MiningResult {
  DtapInstance instance;
  MiningReport report;
};

/// Full pipeline. Activities left without a pool are removed from the
/// transition chain by state elimination, so paths through them are kept.
/// Labels are Start, the remaining activities by first appearance, End.
MiningResult assemble_instance(const EventLog& log, const MiningOptions& options = {});

std::string format_mining_report(const MiningReport& report);

/// Removes state `k` from a row-stochastic matrix, routing its inflow to its
/// successors: P'[i][j] = P[i][j] + P[i][k] P[k][j] / (1 - P[k][k]).
std::vector<std::vector<double>> eliminate_state(const std::vector<std::vector<double>>& probs, std::size_t k);

/// Whether the number of cases in the system keeps growing under SPT.
struct StabilityProbe {
  double early_mean_cases = 0.0;  // time-average over the first quarter of the horizon
  double late_mean_cases = 0.0;   // time-average over the last quarter
  bool growing = false;           // late > 2 * early + 1
};

StabilityProbe probe_stability(const DtapInstance& instance, std::uint64_t seed, int episodes = 3);

}  // namespace dtap

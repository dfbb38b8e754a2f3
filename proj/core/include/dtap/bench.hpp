#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtap/policies.hpp"
#include "dtap/stats.hpp"

namespace dtap {

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::string policy;
  std::string instance;
  double horizon_hours = 0.0;
  std::int64_t cases = 0;  // every case that entered the system
  std::int64_t completed = 0;
  double mean_cycle = 0.0;  // hours, over all cases, open ones charged up to the horizon
  double total_reward = 0.0;

  friend bool operator==(const ReplicationResult&, const ReplicationResult&) = default;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

/// Factory for "random", "fifo" or "spt".
PolicyFactory builtin_policy_factory(const std::string& name);

struct ReplicationOptions {
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  /// Overrides the instance horizon when positive.
  double horizon_hours = 0.0;
  EngineConfig engine;
  unsigned threads = 1;
  std::string instance_name = "instance";
};

/// Raised when an episode's reward total disagrees with its cycle times.
class AuditFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Copy of `instance` with another horizon.
std::shared_ptr<const DtapInstance> with_horizon(const std::shared_ptr<const DtapInstance>& instance, double hours);

/// Episodes with seeds base_seed .. base_seed + n - 1, one fresh policy each.
/// Row i always belongs to seed base_seed + i regardless of thread count.
std::vector<ReplicationResult> run_replications(std::shared_ptr<const DtapInstance> instance,
                                                const PolicyFactory& factory, const ReplicationOptions& options);

/// Runs the given seeds in order on one policy object (for remote agents).
std::vector<ReplicationResult> run_replications_sequential(std::shared_ptr<const DtapInstance> instance,
                                                           Policy& policy, const ReplicationOptions& options);

std::string replication_csv_header();
std::string to_csv_row(const ReplicationResult& row);
void write_replications_csv(std::ostream& out, const std::vector<ReplicationResult>& rows);
std::vector<ReplicationResult> read_replications_csv(const std::filesystem::path& path);
std::vector<ReplicationResult> read_replications_csv_text(const std::string& text);

std::vector<double> mean_cycles(const std::vector<ReplicationResult>& rows);

struct AgreementResult {
  std::size_t samples = 0;  // multi-choice decisions compared
  std::size_t equal = 0;
  std::size_t episodes = 0;
  bool defined() const { return samples > 0; }
  double fraction() const { return samples ? static_cast<double>(equal) / static_cast<double>(samples) : 0.0; }
};

struct AgreementOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  EngineConfig engine;
  /// Give up after this many episodes.
  std::size_t max_episodes = 100000;
  /// Give up early when this many episodes in a row yield no multi-choice decision.
  std::size_t barren_episode_limit = 50;
};

/// Drives episodes with `driver`; at every decision with at least two feasible
/// pairs also asks `other`, counting equal choices until `samples` are taken.
AgreementResult action_agreement(const std::shared_ptr<const DtapInstance>& instance, Policy& driver,
                                 Policy& other, const AgreementOptions& options);

struct CrossEvalCell {
  std::string row;     // test instance
  std::string column;  // policy or agent (trained-on instance)
  SampleStats mean_cycle;
  std::optional<std::string> error;
};

struct NamedInstance {
  std::string name;
  std::shared_ptr<const DtapInstance> instance;
};

struct NamedPolicy {
  std::string name;
  PolicyFactory factory;
};

/// Every policy on every instance. A failing cell keeps its error text and the
/// rest of the matrix is still filled.
std::vector<CrossEvalCell> cross_eval(const std::vector<NamedInstance>& instances,
                                      const std::vector<NamedPolicy>& policies, const ReplicationOptions& options);

/// Wide CSV: one row per instance, `<column>_mean,<column>_std` per column.
/// Failed cells are written as NA.
void write_cross_eval_csv(std::ostream& out, const std::vector<CrossEvalCell>& cells);

}  // namespace dtap

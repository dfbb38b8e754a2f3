#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtap {

using LabelId = int;
using ResourceId = int;

enum class LabelKind { start, end, regular };

std::string_view to_string(LabelKind kind);
std::optional<LabelKind> parse_label_kind(std::string_view text);

struct ActivityLabel {
  LabelId id = 0;
  std::string name;
  LabelKind kind = LabelKind::regular;
};

struct Resource {
  ResourceId id = 0;
  std::string name;
  int weight = 1;
};

/// Gaussian completion-time model of one (label, resource) pool pair, in hours.
struct CompletionModel {
  double mean = 1.0;
  double std_dev = 0.0;
};

struct PoolPair {
  LabelId label = 0;
  ResourceId resource = 0;

  friend auto operator<=>(const PoolPair&, const PoolPair&) = default;
};

/// Dense |L| x |L| next-label probabilities. Rows of end labels are unused.
struct TransitionModel {
  std::vector<std::vector<double>> rows;
};

struct Calendar {
  /// Expected number of active resources for each hour of the period.
  std::vector<int> expected_active;

  int period_hours() const { return static_cast<int>(expected_active.size()); }
};

inline constexpr int kWeekHours = 168;

/// floor(clock) mod K.
int hour_of_week(double clock, const Calendar& calendar);

/// Immutable problem parameters. Pool order is the declaration order and fixes
/// the assignment-node indices of every observation built from the instance.
struct DtapInstance {
  std::vector<ActivityLabel> labels;
  std::vector<Resource> resources;
  std::vector<PoolPair> pools;
  std::vector<CompletionModel> completion;  // parallel to pools
  TransitionModel transitions;
  Calendar calendar;
  double arrival_rate = 1.0;
  double horizon_hours = 168.0;

  std::size_t label_count() const { return labels.size(); }
  std::size_t resource_count() const { return resources.size(); }

  LabelId start_label() const;
  bool is_end(LabelId label) const { return labels.at(label).kind == LabelKind::end; }

  /// Index of the pair in `pools`, if it is a pool pair.
  std::optional<std::size_t> pool_index(PoolPair pair) const;
  const CompletionModel& completion_of(PoolPair pair) const;

  std::optional<LabelId> find_label(std::string_view name) const;
  std::optional<ResourceId> find_resource(std::string_view name) const;
};

enum class ViolationCode {
  LABEL_IDS_NOT_DENSE,
  START_LABEL_COUNT,
  NO_END_LABEL,
  RESOURCE_IDS_NOT_DENSE,
  BAD_WEIGHT,
  POOL_UNKNOWN_LABEL,
  POOL_UNKNOWN_RESOURCE,
  POOL_DUPLICATE,
  POOL_ON_MARKER,
  EMPTY_POOL,
  COMPLETION_MISMATCH,
  BAD_COMPLETION_MODEL,
  TRANSITION_SHAPE,
  NEGATIVE_PROBABILITY,
  ROW_NOT_STOCHASTIC,
  START_AS_TARGET,
  NO_END_REACHABLE,
  EMPTY_CALENDAR,
  NEGATIVE_CALENDAR,
  BAD_ARRIVAL_RATE,
  BAD_HORIZON,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_instance(const DtapInstance& instance);

bool has_violation(const ValidationReport& report, ViolationCode code);
std::string format_report(const ValidationReport& report);

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an instance file parses but does not describe a valid instance.
class InvalidInstanceError : public InstanceError {
 public:
  explicit InvalidInstanceError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Rows off by at most this much are renormalized on load; larger errors are
/// left in place and reported by validation.
inline constexpr double kRenormalizeTolerance = 1e-6;
inline constexpr double kStochasticTolerance = 1e-9;

DtapInstance instance_from_json_text(std::string_view text);
std::string instance_to_json_text(const DtapInstance& instance);

DtapInstance load_instance(const std::filesystem::path& path);
void save_instance(const DtapInstance& instance, const std::filesystem::path& path);

}  // namespace dtap

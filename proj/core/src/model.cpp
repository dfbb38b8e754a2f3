#include "dtap/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dtap {

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::start: return "start";
    case LabelKind::end: return "end";
    case LabelKind::regular: return "regular";
  }
  return "regular";
}

std::optional<LabelKind> parse_label_kind(std::string_view text) {
  if (text == "start") return LabelKind::start;
  if (text == "end") return LabelKind::end;
  if (text == "regular") return LabelKind::regular;
  return std::nullopt;
}

int hour_of_week(double clock, const Calendar& calendar) {
  const auto period = static_cast<std::int64_t>(calendar.period_hours());
  if (period <= 0) return 0;
  const auto hour = static_cast<std::int64_t>(std::floor(clock));
  return static_cast<int>(((hour % period) + period) % period);
}

LabelId DtapInstance::start_label() const {
  for (const auto& label : labels) {
    if (label.kind == LabelKind::start) return label.id;
  }
  throw InstanceError("instance has no start label");
}

std::optional<std::size_t> DtapInstance::pool_index(PoolPair pair) const {
  const auto it = std::find(pools.begin(), pools.end(), pair);
  if (it == pools.end()) return std::nullopt;
  return static_cast<std::size_t>(it - pools.begin());
}

const CompletionModel& DtapInstance::completion_of(PoolPair pair) const {
  const auto index = pool_index(pair);
  if (!index) {
    throw InstanceError("(" + std::to_string(pair.label) + "," + std::to_string(pair.resource) +
                        ") is not a pool pair");
  }
  return completion.at(*index);
}

std::optional<LabelId> DtapInstance::find_label(std::string_view name) const {
  for (const auto& label : labels) {
    if (label.name == name) return label.id;
  }
  return std::nullopt;
}

std::optional<ResourceId> DtapInstance::find_resource(std::string_view name) const {
  for (const auto& resource : resources) {
    if (resource.name == name) return resource.id;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::LABEL_IDS_NOT_DENSE: return "LABEL_IDS_NOT_DENSE";
    case ViolationCode::START_LABEL_COUNT: return "START_LABEL_COUNT";
    case ViolationCode::NO_END_LABEL: return "NO_END_LABEL";
    case ViolationCode::RESOURCE_IDS_NOT_DENSE: return "RESOURCE_IDS_NOT_DENSE";
    case ViolationCode::BAD_WEIGHT: return "BAD_WEIGHT";
    case ViolationCode::POOL_UNKNOWN_LABEL: return "POOL_UNKNOWN_LABEL";
    case ViolationCode::POOL_UNKNOWN_RESOURCE: return "POOL_UNKNOWN_RESOURCE";
    case ViolationCode::POOL_DUPLICATE: return "POOL_DUPLICATE";
    case ViolationCode::POOL_ON_MARKER: return "POOL_ON_MARKER";
    case ViolationCode::EMPTY_POOL: return "EMPTY_POOL";
    case ViolationCode::COMPLETION_MISMATCH: return "COMPLETION_MISMATCH";
    case ViolationCode::BAD_COMPLETION_MODEL: return "BAD_COMPLETION_MODEL";
    case ViolationCode::TRANSITION_SHAPE: return "TRANSITION_SHAPE";
    case ViolationCode::NEGATIVE_PROBABILITY: return "NEGATIVE_PROBABILITY";
    case ViolationCode::ROW_NOT_STOCHASTIC: return "ROW_NOT_STOCHASTIC";
    case ViolationCode::START_AS_TARGET: return "START_AS_TARGET";
    case ViolationCode::NO_END_REACHABLE: return "NO_END_REACHABLE";
    case ViolationCode::EMPTY_CALENDAR: return "EMPTY_CALENDAR";
    case ViolationCode::NEGATIVE_CALENDAR: return "NEGATIVE_CALENDAR";
    case ViolationCode::BAD_ARRIVAL_RATE: return "BAD_ARRIVAL_RATE";
    case ViolationCode::BAD_HORIZON: return "BAD_HORIZON";
  }
  return "UNKNOWN";
}

namespace {

class ReportBuilder {
 public:
  void add(ViolationCode code, std::string detail) { report_.push_back({code, std::move(detail)}); }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

void check_labels(const DtapInstance& instance, ReportBuilder& out) {
  int starts = 0;
  int ends = 0;
  for (std::size_t i = 0; i < instance.labels.size(); ++i) {
    const auto& label = instance.labels[i];
    if (label.id != static_cast<int>(i)) {
      out.add(ViolationCode::LABEL_IDS_NOT_DENSE,
              "label '" + label.name + "' at position " + std::to_string(i) + " has id " +
                  std::to_string(label.id));
    }
    starts += label.kind == LabelKind::start;
    ends += label.kind == LabelKind::end;
  }
  if (starts != 1) {
    out.add(ViolationCode::START_LABEL_COUNT,
            "expected exactly one start label, found " + std::to_string(starts));
  }
  if (ends < 1) out.add(ViolationCode::NO_END_LABEL, "no label has kind=end");
}

void check_resources(const DtapInstance& instance, ReportBuilder& out) {
  for (std::size_t i = 0; i < instance.resources.size(); ++i) {
    const auto& resource = instance.resources[i];
    if (resource.id != static_cast<int>(i)) {
      out.add(ViolationCode::RESOURCE_IDS_NOT_DENSE,
              "resource '" + resource.name + "' at position " + std::to_string(i) + " has id " +
                  std::to_string(resource.id));
    }
    if (resource.weight < 1) {
      out.add(ViolationCode::BAD_WEIGHT,
              "resource '" + resource.name + "' has weight " + std::to_string(resource.weight));
    }
  }
}

void check_pools(const DtapInstance& instance, ReportBuilder& out) {
  const auto n_labels = static_cast<int>(instance.labels.size());
  const auto n_resources = static_cast<int>(instance.resources.size());
  std::set<PoolPair> seen;
  std::vector<int> pool_size(instance.labels.size(), 0);

  for (const auto& pair : instance.pools) {
    const auto where = "(" + std::to_string(pair.label) + "," + std::to_string(pair.resource) + ")";
    const bool label_ok = pair.label >= 0 && pair.label < n_labels;
    if (!label_ok) out.add(ViolationCode::POOL_UNKNOWN_LABEL, "pool pair " + where);
    if (pair.resource < 0 || pair.resource >= n_resources) {
      out.add(ViolationCode::POOL_UNKNOWN_RESOURCE, "pool pair " + where);
    }
    if (!seen.insert(pair).second) out.add(ViolationCode::POOL_DUPLICATE, "pool pair " + where);
    if (label_ok) {
      if (instance.labels[pair.label].kind != LabelKind::regular) {
        out.add(ViolationCode::POOL_ON_MARKER, "pool pair " + where + " targets a start/end marker");
      }
      ++pool_size[pair.label];
    }
  }
  for (const auto& label : instance.labels) {
    if (label.kind == LabelKind::regular && label.id >= 0 && label.id < n_labels &&
        pool_size[label.id] == 0) {
      out.add(ViolationCode::EMPTY_POOL, "label '" + label.name + "' has no resources");
    }
  }

  if (instance.completion.size() != instance.pools.size()) {
    out.add(ViolationCode::COMPLETION_MISMATCH,
            std::to_string(instance.completion.size()) + " completion models for " +
                std::to_string(instance.pools.size()) + " pool pairs");
  }
  for (std::size_t i = 0; i < instance.completion.size(); ++i) {
    const auto& model = instance.completion[i];
    if (!std::isfinite(model.mean) || model.mean <= 0.0 || !std::isfinite(model.std_dev) ||
        model.std_dev < 0.0) {
      out.add(ViolationCode::BAD_COMPLETION_MODEL,
              "completion model " + std::to_string(i) + " has mean " + std::to_string(model.mean) +
                  ", std_dev " + std::to_string(model.std_dev));
    }
  }
}

void check_transitions(const DtapInstance& instance, ReportBuilder& out) {
  const auto n = instance.labels.size();
  const auto& rows = instance.transitions.rows;
  if (rows.size() != n) {
    out.add(ViolationCode::TRANSITION_SHAPE,
            std::to_string(rows.size()) + " transition rows for " + std::to_string(n) + " labels");
    return;
  }
  bool any_end = false;
  for (std::size_t from = 0; from < n; ++from) {
    if (rows[from].size() != n) {
      out.add(ViolationCode::TRANSITION_SHAPE, "row " + std::to_string(from) + " has " +
                                                   std::to_string(rows[from].size()) + " entries");
      return;
    }
    if (instance.labels[from].kind == LabelKind::end) continue;

    double sum = 0.0;
    for (std::size_t to = 0; to < n; ++to) {
      const double p = rows[from][to];
      if (!(p >= 0.0)) {
        out.add(ViolationCode::NEGATIVE_PROBABILITY,
                "p(" + std::to_string(from) + "->" + std::to_string(to) + ") = " + std::to_string(p));
        continue;
      }
      sum += p;
      if (p > 0.0 && instance.labels[to].kind == LabelKind::start) {
        out.add(ViolationCode::START_AS_TARGET,
                "row " + std::to_string(from) + " transitions to the start label");
      }
      if (p > 0.0 && instance.labels[to].kind == LabelKind::end) any_end = true;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      out.add(ViolationCode::ROW_NOT_STOCHASTIC,
              "row " + std::to_string(from) + " ('" + instance.labels[from].name + "') sums to " +
                  std::to_string(sum));
    }
  }
  if (!any_end) out.add(ViolationCode::NO_END_REACHABLE, "no label transitions to an end label");
}

}  // namespace

ValidationReport validate_instance(const DtapInstance& instance) {
  ReportBuilder out;
  check_labels(instance, out);
  check_resources(instance, out);
  check_pools(instance, out);
  check_transitions(instance, out);

  if (instance.calendar.expected_active.empty()) {
    out.add(ViolationCode::EMPTY_CALENDAR, "calendar has no hours");
  }
  for (std::size_t k = 0; k < instance.calendar.expected_active.size(); ++k) {
    if (instance.calendar.expected_active[k] < 0) {
      out.add(ViolationCode::NEGATIVE_CALENDAR, "hour " + std::to_string(k));
    }
  }
  if (!std::isfinite(instance.arrival_rate) || instance.arrival_rate <= 0.0) {
    out.add(ViolationCode::BAD_ARRIVAL_RATE, std::to_string(instance.arrival_rate));
  }
  if (!std::isfinite(instance.horizon_hours) || instance.horizon_hours <= 0.0) {
    out.add(ViolationCode::BAD_HORIZON, std::to_string(instance.horizon_hours));
  }
  return out.take();
}

bool has_violation(const ValidationReport& report, ViolationCode code) {
  return std::any_of(report.begin(), report.end(),
                     [code](const Violation& v) { return v.code == code; });
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  for (const auto& v : report) out << to_string(v.code) << ": " << v.detail << '\n';
  return out.str();
}

InvalidInstanceError::InvalidInstanceError(ValidationReport report)
    : InstanceError("invalid instance:\n" + format_report(report)), report_(std::move(report)) {}

}  // namespace dtap

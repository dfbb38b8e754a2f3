#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dtap/model.hpp"

namespace dtap {

using CaseId = std::int64_t;
using Rng = std::mt19937_64;

enum class CaseStatus { active, busy, completed };

struct Case {
  CaseId id = 0;
  LabelId current_label = 0;
  double arrival_time = 0.0;
  CaseStatus status = CaseStatus::active;
  double completion_time = std::numeric_limits<double>::quiet_NaN();
};

struct InFlightAssignment {
  ResourceId resource = 0;
  CaseId case_id = 0;
  LabelId label = 0;
  double start_time = 0.0;
  double completion_time = 0.0;  // never exposed to policies
};

enum class ResourceStatus { off, active, busy };

/// Same-time events fire in this order, then by insertion sequence.
enum class EventKind : int { complete_activity = 0, schedule_resources = 1, case_arrival = 2 };

std::string_view to_string(EventKind kind);

struct PendingEvent {
  double time = 0.0;
  EventKind kind = EventKind::case_arrival;
  std::uint64_t seq = 0;
  ResourceId resource = -1;

  friend std::partial_ordering operator<=>(const PendingEvent& a, const PendingEvent& b) {
    if (auto c = a.time <=> b.time; c != 0) return c;
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    return a.seq <=> b.seq;
  }
  friend bool operator==(const PendingEvent& a, const PendingEvent& b) { return (a <=> b) == 0; }
};

/// Mutable runtime state of one episode.
struct SimState {
  double clock = 0.0;
  std::int64_t decision_step = 0;

  std::set<ResourceId> active_resources;
  std::set<ResourceId> busy_resources;
  std::set<ResourceId> off_resources;
  std::vector<bool> leave_after_completion;  // per resource

  std::vector<Case> cases;  // indexed by case id
  std::set<CaseId> active_cases;
  std::set<CaseId> busy_cases;
  std::vector<CaseId> completed_cases;
  // Per-label FIFO queues of active cases, keyed by (arrival time, case id).
  std::vector<std::set<std::pair<double, CaseId>>> queues;

  std::map<ResourceId, InFlightAssignment> in_flight;
  std::set<PendingEvent> events;
  std::uint64_t next_event_seq = 0;
  Rng rng;

  /// Empty state sized for the instance: all resources off, no cases.
  static SimState empty_for(const DtapInstance& instance);

  ResourceStatus status_of(ResourceId resource) const;
  std::size_t cases_in_system() const { return active_cases.size() + busy_cases.size(); }
  std::size_t active_count(LabelId label) const { return queues.at(label).size(); }

  /// Mutators that keep the index sets consistent. Intended for building
  /// hand-crafted states; the engine uses them too.
  void set_resource_status(ResourceId resource, ResourceStatus status);
  CaseId add_active_case(LabelId label, double arrival_time);
  void activate_case(CaseId id, LabelId label);
  void make_case_busy(CaseId id);
  void complete_case(CaseId id, double when);
  void push_event(double time, EventKind kind, ResourceId resource = -1);
};

/// Returns one message per violated state invariant; empty when consistent.
std::vector<std::string> check_state_invariants(const SimState& state, const DtapInstance& instance);

}  // namespace dtap

#include "dtap/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dtap {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::complete_activity: return "complete_activity";
    case EventKind::schedule_resources: return "schedule_resources";
    case EventKind::case_arrival: return "case_arrival";
  }
  return "unknown";
}

// --- SimState ---------------------------------------------------------------

SimState SimState::empty_for(const DtapInstance& instance) {
  SimState state;
  for (const auto& resource : instance.resources) state.off_resources.insert(resource.id);
  state.leave_after_completion.assign(instance.resources.size(), false);
  state.queues.resize(instance.labels.size());
  return state;
}

ResourceStatus SimState::status_of(ResourceId resource) const {
  if (active_resources.contains(resource)) return ResourceStatus::active;
  if (busy_resources.contains(resource)) return ResourceStatus::busy;
  return ResourceStatus::off;
}

void SimState::set_resource_status(ResourceId resource, ResourceStatus status) {
  active_resources.erase(resource);
  busy_resources.erase(resource);
  off_resources.erase(resource);
  switch (status) {
    case ResourceStatus::active: active_resources.insert(resource); break;
    case ResourceStatus::busy: busy_resources.insert(resource); break;
    case ResourceStatus::off: off_resources.insert(resource); break;
  }
}

CaseId SimState::add_active_case(LabelId label, double arrival_time) {
  const auto id = static_cast<CaseId>(cases.size());
  cases.push_back(Case{id, label, arrival_time, CaseStatus::active});
  active_cases.insert(id);
  queues.at(label).insert({arrival_time, id});
  return id;
}

void SimState::activate_case(CaseId id, LabelId label) {
  auto& c = cases.at(id);
  busy_cases.erase(id);
  c.current_label = label;
  c.status = CaseStatus::active;
  active_cases.insert(id);
  queues.at(label).insert({c.arrival_time, id});
}

void SimState::make_case_busy(CaseId id) {
  auto& c = cases.at(id);
  queues.at(c.current_label).erase({c.arrival_time, id});
  active_cases.erase(id);
  busy_cases.insert(id);
  c.status = CaseStatus::busy;
}

void SimState::complete_case(CaseId id, double when) {
  auto& c = cases.at(id);
  if (c.status == CaseStatus::active) {
    queues.at(c.current_label).erase({c.arrival_time, id});
    active_cases.erase(id);
  }
  busy_cases.erase(id);
  c.status = CaseStatus::completed;
  c.completion_time = when;
  completed_cases.push_back(id);
}

void SimState::push_event(double time, EventKind kind, ResourceId resource) {
  events.insert(PendingEvent{time, kind, next_event_seq++, resource});
}

std::vector<std::string> check_state_invariants(const SimState& state, const DtapInstance& instance) {
  std::vector<std::string> out;
  const auto n_resources = instance.resources.size();

  const auto total = state.active_resources.size() + state.busy_resources.size() + state.off_resources.size();
  if (total != n_resources) {
    out.push_back("resource sets hold " + std::to_string(total) + " entries for " +
                  std::to_string(n_resources) + " resources");
  }
  for (ResourceId r = 0; r < static_cast<ResourceId>(n_resources); ++r) {
    const int memberships = static_cast<int>(state.active_resources.contains(r)) +
                            static_cast<int>(state.busy_resources.contains(r)) +
                            static_cast<int>(state.off_resources.contains(r));
    if (memberships != 1) {
      out.push_back("resource " + std::to_string(r) + " is in " + std::to_string(memberships) + " sets");
    }
    if (r < static_cast<ResourceId>(state.leave_after_completion.size()) && state.leave_after_completion[r] &&
        !state.busy_resources.contains(r)) {
      out.push_back("resource " + std::to_string(r) + " flagged to leave but not busy");
    }
  }

  if (state.in_flight.size() != state.busy_resources.size() || state.in_flight.size() != state.busy_cases.size()) {
    out.push_back("|B|=" + std::to_string(state.in_flight.size()) + " |M^b|=" +
                  std::to_string(state.busy_resources.size()) + " |C^b|=" + std::to_string(state.busy_cases.size()));
  }
  for (const auto& [resource, assignment] : state.in_flight) {
    if (!state.busy_resources.contains(resource)) {
      out.push_back("in-flight resource " + std::to_string(resource) + " is not busy");
    }
    if (!state.busy_cases.contains(assignment.case_id)) {
      out.push_back("in-flight case " + std::to_string(assignment.case_id) + " is not busy");
    }
    if (assignment.completion_time < assignment.start_time) {
      out.push_back("in-flight assignment of resource " + std::to_string(resource) + " completes before it starts");
    }
  }

  std::size_t queued = 0;
  for (const auto& queue : state.queues) queued += queue.size();
  if (queued != state.active_cases.size()) {
    out.push_back("label queues hold " + std::to_string(queued) + " cases, active set " +
                  std::to_string(state.active_cases.size()));
  }
  const auto accounted = state.active_cases.size() + state.busy_cases.size() + state.completed_cases.size();
  if (accounted != state.cases.size()) {
    out.push_back("case conservation: " + std::to_string(accounted) + " accounted of " +
                  std::to_string(state.cases.size()) + " arrivals");
  }
  for (const auto& c : state.cases) {
    const int memberships = static_cast<int>(state.active_cases.contains(c.id)) +
                            static_cast<int>(state.busy_cases.contains(c.id)) +
                            static_cast<int>(c.status == CaseStatus::completed);
    if (memberships != 1) {
      out.push_back("case " + std::to_string(c.id) + " is in " + std::to_string(memberships) + " sets");
    }
    if (c.arrival_time > state.clock) out.push_back("case " + std::to_string(c.id) + " arrives in the future");
    if (c.status == CaseStatus::active && !state.queues.at(c.current_label).contains({c.arrival_time, c.id})) {
      out.push_back("active case " + std::to_string(c.id) + " missing from its label queue");
    }
  }
  return out;
}

// --- sampling ---------------------------------------------------------------

double sample_interarrival(Rng& rng, double arrival_rate) {
  std::exponential_distribution<double> dist(arrival_rate);
  return dist(rng);
}

double sample_completion(const DtapInstance& instance, LabelId label, ResourceId resource, Rng& rng,
                         bool determinize) {
  const auto& model = instance.completion_of({label, resource});
  if (determinize || model.std_dev == 0.0) return std::max(model.mean, kMinDuration);
  std::normal_distribution<double> dist(model.mean, model.std_dev);
  return std::max(std::abs(dist(rng)), kMinDuration);
}

std::vector<ResourceId> weighted_sample_without_replacement(std::span<const ResourceId> candidates,
                                                            std::span<const int> weights,
                                                            std::size_t count, Rng& rng) {
  std::vector<ResourceId> pool(candidates.begin(), candidates.end());
  std::vector<double> w(weights.begin(), weights.end());
  count = std::min(count, pool.size());

  std::vector<ResourceId> chosen;
  chosen.reserve(count);
  while (chosen.size() < count) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::size_t pick = pool.size() - 1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> dist(0.0, total);
      const double u = dist(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        acc += w[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      std::uniform_int_distribution<std::size_t> dist(0, pool.size() - 1);
      pick = dist(rng);
    }
    chosen.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<long>(pick));
    w.erase(w.begin() + static_cast<long>(pick));
  }
  return chosen;
}

std::vector<ResourceId> uniform_sample_without_replacement(std::span<const ResourceId> candidates,
                                                           std::size_t count, Rng& rng) {
  std::vector<ResourceId> pool(candidates.begin(), candidates.end());
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
    std::swap(pool[i], pool[dist(rng)]);
  }
  pool.resize(count);
  return pool;
}

// --- errors -----------------------------------------------------------------

std::string_view to_string(InfeasibleReason reason) {
  switch (reason) {
    case InfeasibleReason::not_in_pool: return "pair not in G";
    case InfeasibleReason::resource_busy: return "resource busy";
    case InfeasibleReason::resource_off: return "resource not active";
    case InfeasibleReason::no_such_case: return "no active case with that label";
    case InfeasibleReason::episode_ended: return "episode ended";
  }
  return "infeasible";
}

InfeasibleAssignment::InfeasibleAssignment(InfeasibleReason reason, PoolPair pair)
    : std::runtime_error("infeasible assignment (" + std::to_string(pair.label) + "," +
                         std::to_string(pair.resource) + "): " + std::string(to_string(reason))),
      reason_(reason),
      pair_(pair) {}

// --- Simulation -------------------------------------------------------------

Simulation::Simulation(std::shared_ptr<const DtapInstance> instance, SimState state, std::uint64_t seed,
                       EngineConfig config)
    : instance_(std::move(instance)), state_(std::move(state)), seed_(seed), config_(config) {
  last_clock_ = state_.clock;
  ledger_.record_transition(state_.clock, static_cast<std::int64_t>(state_.cases_in_system()));
}

Simulation::Simulation(std::shared_ptr<const DtapInstance> instance, std::uint64_t seed, EngineConfig config)
    : Simulation(instance, SimState::empty_for(*instance), seed, config) {
  if (auto report = validate_instance(*instance_); !report.empty()) throw InvalidInstanceError(std::move(report));
  state_.rng.seed(seed);
  schedule_resources();
  state_.push_event(1.0, EventKind::schedule_resources);
  state_.push_event(sample_interarrival(state_.rng, instance_->arrival_rate), EventKind::case_arrival);
}

Simulation Simulation::from_state(std::shared_ptr<const DtapInstance> instance, SimState state,
                                  EngineConfig config) {
  return Simulation(std::move(instance), std::move(state), 0, config);
}

std::vector<PoolPair> Simulation::feasible_pairs() const {
  std::vector<PoolPair> feasible;
  for (const auto& pair : instance_->pools) {
    if (state_.active_resources.contains(pair.resource) && !state_.queues[pair.label].empty()) {
      feasible.push_back(pair);
    }
  }
  return feasible;
}

StepResult Simulation::step_until_decision() {
  if (end_time_) return EpisodeEnd{*end_time_};
  while (true) {
    auto feasible = feasible_pairs();
    if (!feasible.empty()) {
      if (config_.auto_apply_singletons && feasible.size() == 1) {
        apply_assignment(feasible.front());
        continue;
      }
      return DecisionPoint{std::move(feasible), state_.clock, state_.decision_step};
    }
    if (state_.events.empty()) {
      end_time_ = std::max(state_.clock, instance_->horizon_hours);
      return EpisodeEnd{*end_time_};
    }
    const double next_time = state_.events.begin()->time;
    if (next_time > instance_->horizon_hours) {
      end_time_ = next_time;
      return EpisodeEnd{next_time};
    }
    while (!state_.events.empty() && state_.events.begin()->time == next_time) {
      const auto event = *state_.events.begin();
      state_.events.erase(state_.events.begin());
      fire(event);
    }
  }
}

void Simulation::fire(const PendingEvent& event) {
  state_.clock = event.time;
  switch (event.kind) {
    case EventKind::complete_activity:
      fire_complete_activity(event.resource);
      break;
    case EventKind::schedule_resources:
      schedule_resources();
      state_.push_event(std::floor(state_.clock) + 1.0, EventKind::schedule_resources);
      break;
    case EventKind::case_arrival:
      arrive_case();
      state_.push_event(state_.clock + sample_interarrival(state_.rng, instance_->arrival_rate),
                        EventKind::case_arrival);
      break;
  }
}

const InFlightAssignment& Simulation::apply_assignment(PoolPair pair) {
  if (end_time_) throw InfeasibleAssignment(InfeasibleReason::episode_ended, pair);
  if (!instance_->pool_index(pair)) throw InfeasibleAssignment(InfeasibleReason::not_in_pool, pair);
  switch (state_.status_of(pair.resource)) {
    case ResourceStatus::busy: throw InfeasibleAssignment(InfeasibleReason::resource_busy, pair);
    case ResourceStatus::off: throw InfeasibleAssignment(InfeasibleReason::resource_off, pair);
    case ResourceStatus::active: break;
  }
  auto& queue = state_.queues.at(pair.label);
  if (queue.empty()) throw InfeasibleAssignment(InfeasibleReason::no_such_case, pair);

  const CaseId case_id = queue.begin()->second;
  state_.make_case_busy(case_id);
  state_.set_resource_status(pair.resource, ResourceStatus::busy);
  const double duration =
      sample_completion(*instance_, pair.label, pair.resource, state_.rng, config_.determinize);
  const InFlightAssignment assignment{pair.resource, case_id, pair.label, state_.clock, state_.clock + duration};
  auto [it, inserted] = state_.in_flight.insert_or_assign(pair.resource, assignment);
  state_.push_event(assignment.completion_time, EventKind::complete_activity, pair.resource);
  ++state_.decision_step;

  emit("start_activity", case_id, pair.resource, pair.label);
  after_transition();
  ledger_.reward_for_decision();
  return it->second;
}

void Simulation::arrive_case() {
  const LabelId first = sample_next_label(instance_->start_label());
  const CaseId id = state_.add_active_case(first, state_.clock);
  emit("case_arrival", id, -1, first);
  if (instance_->is_end(first)) {
    state_.complete_case(id, state_.clock);
    emit("complete_case", id, -1, first);
  }
  after_transition();
}

void Simulation::fire_complete_activity(ResourceId resource) {
  const auto it = state_.in_flight.find(resource);
  if (it == state_.in_flight.end()) {
    throw std::invalid_argument("resource " + std::to_string(resource) + " has no assignment in flight");
  }
  const InFlightAssignment assignment = it->second;
  if (assignment.completion_time < state_.clock) {
    throw std::logic_error("assignment completion time lies in the past");
  }
  // Direct calls advance the clock to the completion and drop its pending event.
  state_.clock = assignment.completion_time;
  std::erase_if(state_.events, [resource](const PendingEvent& e) {
    return e.kind == EventKind::complete_activity && e.resource == resource;
  });
  state_.in_flight.erase(it);

  if (state_.leave_after_completion.at(resource)) {
    state_.leave_after_completion[resource] = false;
    state_.set_resource_status(resource, ResourceStatus::off);
    emit("resource_leave", -1, resource, -1);
  } else {
    state_.set_resource_status(resource, ResourceStatus::active);
  }

  if (config_.record_activity_log) {
    activity_log_.push_back(
        {assignment.case_id, assignment.label, resource, assignment.start_time, assignment.completion_time});
  }
  emit("complete_activity", assignment.case_id, resource, assignment.label);

  const LabelId next = sample_next_label(assignment.label);
  if (instance_->is_end(next)) {
    state_.complete_case(assignment.case_id, state_.clock);
    emit("complete_case", assignment.case_id, -1, next);
  } else {
    state_.activate_case(assignment.case_id, next);
  }
  after_transition();
}

void Simulation::schedule_resources() {
  const auto& calendar = instance_->calendar.expected_active;
  const auto target = static_cast<std::size_t>(
      std::max(0, calendar.empty() ? 0 : calendar[hour_of_week(state_.clock, instance_->calendar)]));
  std::fill(state_.leave_after_completion.begin(), state_.leave_after_completion.end(), false);

  const std::size_t present = state_.active_resources.size() + state_.busy_resources.size();
  if (present > target) {
    std::size_t excess = present - target;
    const std::vector<ResourceId> active(state_.active_resources.begin(), state_.active_resources.end());
    const auto leaving = uniform_sample_without_replacement(active, std::min(excess, active.size()), state_.rng);
    for (const ResourceId r : leaving) {
      state_.set_resource_status(r, ResourceStatus::off);
      emit("resource_leave", -1, r, -1);
    }
    excess -= leaving.size();
    if (excess > 0) {
      const std::vector<ResourceId> busy(state_.busy_resources.begin(), state_.busy_resources.end());
      for (const ResourceId r : uniform_sample_without_replacement(busy, excess, state_.rng)) {
        state_.leave_after_completion[r] = true;
      }
    }
  } else if (present < target) {
    const std::vector<ResourceId> off(state_.off_resources.begin(), state_.off_resources.end());
    std::vector<int> weights;
    weights.reserve(off.size());
    for (const ResourceId r : off) weights.push_back(instance_->resources[r].weight);
    for (const ResourceId r : weighted_sample_without_replacement(off, weights, target - present, state_.rng)) {
      state_.set_resource_status(r, ResourceStatus::active);
      emit("resource_join", -1, r, -1);
    }
  }
  after_transition();
}

LabelId Simulation::sample_next_label(LabelId from) {
  const auto& row = instance_->transitions.rows.at(from);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const double u = dist(state_.rng);
  double acc = 0.0;
  LabelId last_positive = -1;
  for (std::size_t to = 0; to < row.size(); ++to) {
    if (row[to] <= 0.0) continue;
    acc += row[to];
    last_positive = static_cast<LabelId>(to);
    if (u < acc) return last_positive;
  }
  if (last_positive < 0) throw InstanceError("label " + std::to_string(from) + " has no successors");
  return last_positive;
}

void Simulation::after_transition() {
  if (state_.clock < last_clock_) {
    ++violation_count_;
    if (violation_messages_.size() < 32) violation_messages_.push_back("clock moved backwards");
  }
  last_clock_ = state_.clock;
  ledger_.record_transition(state_.clock, static_cast<std::int64_t>(state_.cases_in_system()));
  if (config_.check_invariants) {
    for (auto& message : check_state_invariants(state_, *instance_)) {
      ++violation_count_;
      if (violation_messages_.size() < 32) violation_messages_.push_back(std::move(message));
    }
  }
}

void Simulation::emit(const char* type, CaseId case_id, ResourceId resource, LabelId label) {
  if (config_.record_trace) trace_.push_back({state_.clock, type, case_id, resource, label});
}

EpisodeSummary Simulation::finalize() {
  if (!end_time_) throw std::logic_error("finalize() called before the episode ended");
  if (!summary_) {
    summary_ = finalize_episode(ledger_, state_, *end_time_);
    summary_->seed = seed_;
  }
  return *summary_;
}

std::string trace_csv_header() { return "clock,event_type,case_id,resource_id,label_id"; }

std::string to_csv_row(const TraceRecord& record) {
  std::ostringstream out;
  out.precision(17);
  out << record.clock << ',' << record.event_type << ',' << record.case_id << ',' << record.resource_id << ','
      << record.label_id;
  return out.str();
}

}  // namespace dtap

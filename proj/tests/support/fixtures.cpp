#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dtap::testing {

std::shared_ptr<const DtapInstance> share(DtapInstance instance) {
  return std::make_shared<const DtapInstance>(std::move(instance));
}

void add_pool(DtapInstance& instance, LabelId label, ResourceId resource, double mean, double std_dev) {
  instance.pools.push_back({label, resource});
  instance.completion.push_back({mean, std_dev});
}

DtapInstance skeleton(const std::vector<std::string>& activities, int resources, int calendar_level) {
  DtapInstance inst;
  inst.labels.push_back({0, "Start", LabelKind::start});
  for (const auto& name : activities) {
    inst.labels.push_back({static_cast<LabelId>(inst.labels.size()), name, LabelKind::regular});
  }
  inst.labels.push_back({static_cast<LabelId>(inst.labels.size()), "End", LabelKind::end});
  for (int r = 0; r < resources; ++r) inst.resources.push_back({r, "r" + std::to_string(r), 1});
  const auto n = inst.labels.size();
  inst.transitions.rows.assign(n, std::vector<double>(n, 0.0));
  inst.calendar.expected_active.assign(kWeekHours, calendar_level);
  inst.arrival_rate = 1.0;
  inst.horizon_hours = 168.0;
  return inst;
}

DtapInstance toy_two_label() {
  auto inst = skeleton({"A", "B"}, 3, 2);
  add_pool(inst, 1, 0, 1.0, 0.3);
  add_pool(inst, 1, 1, 2.0, 0.5);
  add_pool(inst, 2, 1, 1.5, 0.4);
  add_pool(inst, 2, 2, 0.5, 0.1);
  auto& P = inst.transitions.rows;
  P[0][1] = 1.0;
  P[1][2] = 0.6;
  P[1][3] = 0.4;
  P[2][1] = 0.3;
  P[2][3] = 0.7;
  inst.arrival_rate = 0.8;
  return inst;
}

DtapInstance fig5() {
  auto inst = skeleton({"alpha", "beta"}, 3, 3);
  inst.resources[0].name = "a";
  inst.resources[1].name = "b";
  inst.resources[2].name = "c";
  add_pool(inst, 1, 0, 2.0, 0.5);
  add_pool(inst, 1, 1, 1.0, 0.25);
  add_pool(inst, 2, 1, 1.0, 0.25);
  add_pool(inst, 2, 2, 2.0, 0.5);
  auto& P = inst.transitions.rows;
  P[0][1] = 0.5;
  P[0][2] = 0.5;
  P[1][3] = 1.0;
  P[2][3] = 1.0;
  inst.arrival_rate = 1.0;
  return inst;
}

DtapInstance heterogeneous() {
  // Each resource is fast at one activity and slow at the other.
  auto inst = skeleton({"A", "B"}, 4, 4);
  add_pool(inst, 1, 0, 3.0, 0.6);
  add_pool(inst, 1, 1, 3.0, 0.6);
  add_pool(inst, 1, 2, 0.5, 0.1);
  add_pool(inst, 1, 3, 0.5, 0.1);
  add_pool(inst, 2, 0, 0.5, 0.1);
  add_pool(inst, 2, 1, 0.5, 0.1);
  add_pool(inst, 2, 2, 3.0, 0.6);
  add_pool(inst, 2, 3, 3.0, 0.6);
  auto& P = inst.transitions.rows;
  P[0][1] = 1.0;
  P[1][2] = 1.0;
  P[2][3] = 1.0;
  inst.arrival_rate = 1.2;
  return inst;
}

DtapInstance four_choice() {
  auto inst = skeleton({"A"}, 4, 4);
  for (int r = 0; r < 4; ++r) add_pool(inst, 1, r, 0.001, 0.0);
  inst.transitions.rows[0][1] = 1.0;
  inst.transitions.rows[1][2] = 1.0;
  inst.arrival_rate = 1.0;
  return inst;
}

DtapInstance overloaded() {
  auto inst = toy_two_label();
  inst.arrival_rate = 2.5;
  return inst;
}

DtapInstance roundtrip_source() {
  auto inst = skeleton({"A", "B", "C"}, 6, 4);
  // Distinct means per pair, coefficient of variation 0.15.
  for (LabelId l = 1; l <= 3; ++l) {
    for (ResourceId r = 0; r < 6; ++r) {
      const double mean = 0.4 + 0.15 * r + 0.2 * (l - 1);
      add_pool(inst, l, r, mean, 0.15 * mean);
    }
  }
  auto& P = inst.transitions.rows;
  P[0][1] = 0.7;
  P[0][2] = 0.3;
  P[1][2] = 0.5;
  P[1][3] = 0.3;
  P[1][4] = 0.2;
  P[2][3] = 0.6;
  P[2][4] = 0.4;
  P[3][1] = 0.1;
  P[3][4] = 0.9;
  // Four on duty during weekday office hours, three otherwise.
  for (int k = 0; k < kWeekHours; ++k) {
    const int day = k / 24, hour = k % 24;
    inst.calendar.expected_active[static_cast<std::size_t>(k)] = (day < 5 && hour >= 8 && hour < 18) ? 4 : 3;
  }
  for (ResourceId r = 0; r < 6; ++r) inst.resources[static_cast<std::size_t>(r)].weight = 1 + r % 3;
  // Busy but stable: idle on-duty resources leave no trace in a log, so a
  // lightly loaded source would hide part of its calendar.
  inst.arrival_rate = 1.35;
  inst.horizon_hours = 30.0 * kWeekHours;
  return inst;
}

DtapInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const int n_act = uniform_int(1, 4);
  const int n_res = uniform_int(1, 6);
  std::vector<std::string> names;
  for (int i = 0; i < n_act; ++i) names.push_back("act" + std::to_string(i));
  auto inst = skeleton(names, n_res, 0);
  for (auto& r : inst.resources) r.weight = uniform_int(1, 5);

  for (LabelId l = 1; l <= n_act; ++l) {
    std::vector<ResourceId> members;
    for (ResourceId r = 0; r < n_res; ++r) {
      if (uniform(0, 1) < 0.5) members.push_back(r);
    }
    if (members.empty()) members.push_back(uniform_int(0, n_res - 1));
    for (auto r : members) add_pool(inst, l, r, uniform(0.2, 3.0), uniform(0.0, 1.0));
  }

  const auto end = static_cast<std::size_t>(n_act + 1);
  auto& P = inst.transitions.rows;
  for (std::size_t i = 0; i < end; ++i) {
    double total = 0.0;
    for (std::size_t j = 1; j < end; ++j) {
      P[i][j] = uniform(0, 1) < 0.6 ? uniform(0.0, 1.0) : 0.0;
      total += P[i][j];
    }
    if (i == 0 && total == 0.0) {
      P[0][1] = 1.0;
      total = 1.0;
    }
    // Activities always keep at least 20% mass on End.
    const double end_mass = i == 0 ? 0.0 : uniform(0.2, 0.8);
    for (std::size_t j = 1; j < end; ++j) P[i][j] = total > 0 ? P[i][j] / total * (1.0 - end_mass) : 0.0;
    P[i][end] = total > 0 ? end_mass : (i == 0 ? 0.0 : 1.0);
  }
  for (auto& v : inst.calendar.expected_active) v = uniform_int(0, n_res);
  inst.arrival_rate = uniform(0.3, 3.0);
  inst.horizon_hours = uniform(48.0, 168.0);
  return inst;
}

SimState random_state(const DtapInstance& instance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto state = SimState::empty_for(instance);
  state.clock = uniform(0.0, 100.0);
  state.decision_step = static_cast<std::int64_t>(uniform(0, 50));

  std::vector<LabelId> regular;
  for (const auto& l : instance.labels) {
    if (l.kind == LabelKind::regular) regular.push_back(l.id);
  }
  const auto pick_label = [&] {
    return regular[std::uniform_int_distribution<std::size_t>(0, regular.size() - 1)(rng)];
  };

  const int n_active = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int i = 0; i < n_active; ++i) state.add_active_case(pick_label(), uniform(0.0, state.clock));

  for (const auto& res : instance.resources) {
    const double u = uniform(0, 1);
    if (u < 0.45) {
      state.set_resource_status(res.id, ResourceStatus::active);
    } else if (u < 0.75) {
      std::vector<LabelId> labels;
      for (const auto& p : instance.pools) {
        if (p.resource == res.id) labels.push_back(p.label);
      }
      if (labels.empty()) continue;  // stays off
      const LabelId label = labels[std::uniform_int_distribution<std::size_t>(0, labels.size() - 1)(rng)];
      const CaseId id = state.add_active_case(label, uniform(0.0, state.clock));
      state.make_case_busy(id);
      state.set_resource_status(res.id, ResourceStatus::busy);
      const double done = state.clock + uniform(0.01, 3.0);
      state.in_flight[res.id] = InFlightAssignment{res.id, id, label, state.clock, done};
      state.push_event(done, EventKind::complete_activity, res.id);
    }
  }
  state.push_event(std::floor(state.clock) + 1.0, EventKind::schedule_resources);
  state.push_event(state.clock + uniform(0.0, 1.0), EventKind::case_arrival);
  state.rng.seed(seed ^ 0xabcdefULL);
  return state;
}

}  // namespace dtap::testing

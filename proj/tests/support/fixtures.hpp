#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dtap/engine.hpp"
#include "dtap/model.hpp"

namespace dtap::testing {

/// Labels Start, A, B, End; three resources; flat calendar of 2.
DtapInstance toy_two_label();

/// Labels Start, alpha, beta, End; resources a, b, c; pools (alpha,a) 2,
/// (alpha,b) 1, (beta,b) 1, (beta,c) 2; everyone always on duty.
DtapInstance fig5();

/// Two sequential activities with strongly resource-dependent durations.
DtapInstance heterogeneous();

/// One activity, four always-active resources, near-instant work: every
/// arrival meets four equivalent choices.
DtapInstance four_choice();

/// Arrivals exceed service capacity, so the backlog grows with time.
DtapInstance overloaded();

/// Three activities, six resources, full pools, weekly calendar between 3 and
/// 4, used to check that mining a simulated log recovers the parameters.
DtapInstance roundtrip_source();

/// Random valid instance with 1-4 activities and 1-6 resources.
DtapInstance random_instance(std::uint64_t seed);

std::shared_ptr<const DtapInstance> share(DtapInstance instance);

/// Pool pair builder with its completion model.
void add_pool(DtapInstance& instance, LabelId label, ResourceId resource, double mean, double std_dev);

/// Labels Start, then the given regular names, then End. Transitions zeroed.
DtapInstance skeleton(const std::vector<std::string>& activities, int resources, int calendar_level);

/// Random decision-ready state over `instance`: random resource statuses,
/// random active and busy cases, consistent in-flight bookkeeping.
SimState random_state(const DtapInstance& instance, std::uint64_t seed);

}  // namespace dtap::testing

#include "dtap/miner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dtap/policies.hpp"

namespace dtap {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

// Index of `name` in `names`, appending it on first sight.
std::size_t intern(std::vector<std::string>& names, std::unordered_map<std::string, std::size_t>& index,
                   const std::string& name) {
  auto [it, inserted] = index.try_emplace(name, names.size());
  if (inserted) names.push_back(name);
  return it->second;
}

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

}  // namespace

CompletionEstimate mine_completion_models(const EventLog& log) {
  struct Group {
    std::string activity, resource;
    std::vector<double> durations;
  };
  std::vector<Group> groups;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& c : log.cases) {
    for (const auto& r : c.records) {
      if (r.resource.empty()) continue;
      auto [it, inserted] = index.try_emplace({r.activity, r.resource}, groups.size());
      if (inserted) groups.push_back({r.activity, r.resource, {}});
      groups[it->second].durations.push_back(r.end - r.start);
    }
  }

  CompletionEstimate out;
  for (const auto& g : groups) {
    const auto stats = mean_std(g.durations);
    PoolEstimate estimate{g.activity, g.resource, g.durations.size(), stats.mean, stats.std_dev};
    (g.durations.size() >= kMinPoolObservations ? out.pools : out.excluded).push_back(std::move(estimate));
  }
  return out;
}

std::optional<std::size_t> TransitionEstimate::state_of(const std::string& activity) const {
  const auto it = std::find(activities.begin(), activities.end(), activity);
  if (it == activities.end()) return std::nullopt;
  return static_cast<std::size_t>(it - activities.begin()) + 1;
}

TransitionEstimate mine_transitions(const EventLog& log) {
  TransitionEstimate out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& c : log.cases) {
    for (const auto& r : c.records) intern(out.activities, index, r.activity);
  }
  const std::size_t n = out.activities.size() + 2;
  out.counts.assign(n, std::vector<std::size_t>(n, 0));
  for (const auto& c : log.cases) {
    std::size_t prev = out.start_state();
    for (const auto& r : c.records) {
      const std::size_t s = index.at(r.activity) + 1;
      ++out.counts[prev][s];
      prev = s;
    }
    ++out.counts[prev][out.end_state()];
  }
  out.probs.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto total = std::accumulate(out.counts[i].begin(), out.counts[i].end(), std::size_t{0});
    if (total == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      out.probs[i][j] = static_cast<double>(out.counts[i][j]) / static_cast<double>(total);
    }
  }
  return out;
}

CalendarEstimate mine_calendar(const EventLog& log, int period_hours, const std::vector<std::string>* only) {
  if (period_hours <= 0) throw MiningError("calendar period must be positive");
  CalendarEstimate out;
  std::unordered_map<std::string, std::size_t> index;
  std::set<std::string> allowed;
  if (only != nullptr) allowed.insert(only->begin(), only->end());

  for (const auto& c : log.cases) {
    for (const auto& r : c.records) {
      if (r.resource.empty() || (only != nullptr && !allowed.count(r.resource))) continue;
      const auto i = intern(out.resources, index, r.resource);
      if (out.weights.size() <= i) out.weights.resize(i + 1, 0);
      ++out.weights[i];
    }
  }
  for (auto& w : out.weights) w = std::max(w, 1);

  // Absolute hours covered by the log; the origin is a Monday 00:00.
  const auto first_hour = static_cast<std::int64_t>(std::floor(log.span_start));
  const auto last_hour = std::max(first_hour + 1, static_cast<std::int64_t>(std::ceil(log.span_end)));
  const auto hours = static_cast<std::size_t>(last_hour - first_hour);
  std::vector<std::vector<std::size_t>> busy_in(hours);  // resource indices per absolute hour

  for (const auto& c : log.cases) {
    for (const auto& r : c.records) {
      if (r.resource.empty() || (only != nullptr && !allowed.count(r.resource))) continue;
      const auto res = index.at(r.resource);
      auto h0 = static_cast<std::int64_t>(std::floor(r.start));
      // Half-open [start, end); an instantaneous record still marks its hour.
      auto h1 = r.end > r.start ? static_cast<std::int64_t>(std::ceil(r.end)) : h0 + 1;
      h0 = std::max(h0, first_hour);
      h1 = std::min(h1, last_hour);
      for (auto h = h0; h < h1; ++h) busy_in[static_cast<std::size_t>(h - first_hour)].push_back(res);
    }
  }

  const auto K = static_cast<std::size_t>(period_hours);
  std::vector<double> totals(K, 0.0);
  out.week_samples.assign(K, 0);
  for (std::size_t i = 0; i < hours; ++i) {
    auto& ids = busy_in[i];
    std::sort(ids.begin(), ids.end());
    const auto distinct = static_cast<double>(std::unique(ids.begin(), ids.end()) - ids.begin());
    const auto k = static_cast<std::size_t>((first_hour + static_cast<std::int64_t>(i)) % period_hours);
    totals[k] += distinct;
    ++out.week_samples[k];
  }
  out.mean_active.assign(K, 0.0);
  out.calendar.expected_active.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (out.week_samples[k] == 0) continue;
    out.mean_active[k] = totals[k] / static_cast<double>(out.week_samples[k]);
    out.calendar.expected_active[k] = round_half_up(out.mean_active[k]);
  }
  if (hours < K) {
    out.warnings.push_back("log spans " + std::to_string(hours) + " h, less than one " + std::to_string(K) +
                           " h period; calendar is computed from the partial span");
  }
  return out;
}

double mine_arrival_rate(const EventLog& log, double scale) {
  if (log.cases.size() < 2) throw MiningError("arrival rate needs at least 2 cases");
  const double span = log.span_hours();
  if (!(span > 0.0)) throw MiningError("arrival rate undefined: log spans zero time");
  return scale * static_cast<double>(log.cases.size()) / span;
}

std::vector<std::vector<double>> eliminate_state(const std::vector<std::vector<double>>& probs, std::size_t k) {
  const std::size_t n = probs.size();
  const double stay = probs[k][k];
  if (stay >= 1.0) throw MiningError("cannot eliminate an absorbing state");
  std::vector<std::vector<double>> out;
  out.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == k) continue;
    std::vector<double> row;
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      row.push_back(probs[i][j] + probs[i][k] * probs[k][j] / (1.0 - stay));
    }
    out.push_back(std::move(row));
  }
  return out;
}

MiningResult assemble_instance(const EventLog& log, const MiningOptions& options) {
  MiningResult result;
  auto& report = result.report;
  report.cases = log.cases.size();
  report.records = log.record_count();
  report.rejected = log.rejected;

  auto completion = mine_completion_models(log);
  auto transitions = mine_transitions(log);
  report.pools = completion.pools;
  report.excluded_pairs = completion.excluded;

  // Activities that keep a pool, in first-appearance order.
  std::set<std::string> pooled;
  for (const auto& p : completion.pools) pooled.insert(p.activity);
  std::vector<std::size_t> kept_states;  // transition-state indices
  std::vector<std::size_t> drop_states;
  for (std::size_t a = 0; a < transitions.activities.size(); ++a) {
    (pooled.count(transitions.activities[a]) ? kept_states : drop_states).push_back(a + 1);
    if (!pooled.count(transitions.activities[a])) report.eliminated_activities.push_back(transitions.activities[a]);
  }
  if (kept_states.empty()) throw MiningError("no activity has a resource observed at least twice");

  // Eliminate from the highest index down so lower indices stay valid.
  auto probs = transitions.probs;
  for (auto it = drop_states.rbegin(); it != drop_states.rend(); ++it) probs = eliminate_state(probs, *it);

  auto& inst = result.instance;
  inst.labels.push_back({0, "Start", LabelKind::start});
  for (auto s : kept_states) {
    inst.labels.push_back({static_cast<LabelId>(inst.labels.size()), transitions.activities[s - 1], LabelKind::regular});
  }
  inst.labels.push_back({static_cast<LabelId>(inst.labels.size()), "End", LabelKind::end});
  const std::size_t L = inst.labels.size();
  inst.transitions.rows = probs;
  for (auto& row : inst.transitions.rows) {
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 0.0) {
      for (auto& p : row) p /= total;
    }
  }
  if (inst.transitions.rows.size() != L) throw MiningError("internal error: transition matrix shape");

  // Resources in any pool, first appearance in the log.
  std::set<std::string> pooled_resources;
  for (const auto& p : completion.pools) pooled_resources.insert(p.resource);
  std::vector<std::string> resource_names;
  std::unordered_map<std::string, std::size_t> resource_index;
  std::set<std::string> dropped;
  for (const auto& c : log.cases) {
    for (const auto& r : c.records) {
      if (r.resource.empty()) continue;
      if (pooled_resources.count(r.resource)) {
        intern(resource_names, resource_index, r.resource);
      } else if (dropped.insert(r.resource).second) {
        report.dropped_resources.push_back(r.resource);
      }
    }
  }

  auto calendar = mine_calendar(log, options.period_hours, &resource_names);
  report.warnings = calendar.warnings;
  for (std::size_t i = 0; i < resource_names.size(); ++i) {
    const auto cal_index = static_cast<std::size_t>(
        std::find(calendar.resources.begin(), calendar.resources.end(), resource_names[i]) -
        calendar.resources.begin());
    inst.resources.push_back({static_cast<ResourceId>(i), resource_names[i], calendar.weights.at(cal_index)});
  }
  inst.calendar = calendar.calendar;

  // Pools grouped by label, then by resource id.
  for (std::size_t l = 1; l + 1 < L; ++l) {
    std::vector<const PoolEstimate*> members;
    for (const auto& p : completion.pools) {
      if (p.activity == inst.labels[l].name) members.push_back(&p);
    }
    std::sort(members.begin(), members.end(), [&](const PoolEstimate* a, const PoolEstimate* b) {
      return resource_index.at(a->resource) < resource_index.at(b->resource);
    });
    for (const auto* p : members) {
      inst.pools.push_back({static_cast<LabelId>(l), static_cast<ResourceId>(resource_index.at(p->resource))});
      inst.completion.push_back({p->mean, p->std_dev});
    }
  }

  inst.arrival_rate = mine_arrival_rate(log, options.lambda_scale);
  inst.horizon_hours = options.horizon_hours;

  const auto violations = validate_instance(inst);
  if (!violations.empty()) throw MiningError("mined instance is invalid:\n" + format_report(violations));

  // Summary statistics over the retained labels.
  report.label_count = L - 2;
  report.resource_count = inst.resources.size();
  report.arrival_rate = inst.arrival_rate;
  std::vector<double> per_case;
  for (const auto& c : log.cases) {
    double n = 0;
    for (const auto& r : c.records) n += pooled.count(r.activity) ? 1.0 : 0.0;
    per_case.push_back(n);
  }
  const auto apc = mean_std(per_case);
  report.activities_per_case_mean = apc.mean;
  report.activities_per_case_std = apc.std_dev;
  std::vector<double> pool_sizes(L - 2, 0.0);
  for (const auto& p : inst.pools) pool_sizes[static_cast<std::size_t>(p.label) - 1] += 1.0;
  const auto ps = mean_std(pool_sizes);
  report.pool_size_mean = ps.mean;
  report.pool_size_std = ps.std_dev;
  const auto av = mean_std(std::vector<double>(inst.calendar.expected_active.begin(), inst.calendar.expected_active.end()));
  report.availability_mean = av.mean;
  report.availability_std = av.std_dev;
  return result;
}

std::string format_mining_report(const MiningReport& r) {
  std::ostringstream out;
  out.precision(4);
  out << "cases: " << r.cases << "\nrecords: " << r.records << "\nrejected rows: " << r.rejected.size() << '\n';
  for (const auto& row : r.rejected) out << "  line " << row.line << ": " << row.reason << '\n';
  out << "|L| = " << r.label_count << "\n|M| = " << r.resource_count << "\nlambda = " << r.arrival_rate << " /h\n"
      << "activities per case: " << r.activities_per_case_mean << " +- " << r.activities_per_case_std << '\n'
      << "pool size: " << r.pool_size_mean << " +- " << r.pool_size_std << '\n'
      << "hourly availability: " << r.availability_mean << " +- " << r.availability_std << '\n';
  out << "pools (" << r.pools.size() << "):\n";
  for (const auto& p : r.pools) {
    out << "  " << p.activity << " / " << p.resource << ": n=" << p.count << " mean=" << p.mean
        << " std=" << p.std_dev << '\n';
  }
  if (!r.excluded_pairs.empty()) out << "pairs seen once (excluded): " << r.excluded_pairs.size() << '\n';
  for (const auto& a : r.eliminated_activities) out << "activity without pool, bypassed: " << a << '\n';
  for (const auto& m : r.dropped_resources) out << "resource without pool, dropped: " << m << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

StabilityProbe probe_stability(const DtapInstance& instance, std::uint64_t seed, int episodes) {
  auto shared = std::make_shared<const DtapInstance>(instance);
  const double H = instance.horizon_hours;
  const double q = H / 4.0;
  double early = 0.0, late = 0.0;
  SptPolicy spt;
  for (int e = 0; e < episodes; ++e) {
    run_episode(shared, spt, seed + static_cast<std::uint64_t>(e), EngineConfig{},
                [&](const Simulation& sim) {
                  // Time-average of the piecewise-constant case count over a window.
                  const auto& segs = sim.ledger().segments();
                  const auto area = [&](double from, double to) {
                    double a = 0.0;
                    for (std::size_t i = 0; i < segs.size(); ++i) {
                      const double s = segs[i].time;
                      const double t = i + 1 < segs.size() ? segs[i + 1].time : H;
                      const double lo = std::max(s, from), hi = std::min(t, to);
                      if (hi > lo) a += static_cast<double>(segs[i].cases) * (hi - lo);
                    }
                    return a / (to - from);
                  };
                  early += area(0.0, q);
                  late += area(H - q, H);
                });
  }
  StabilityProbe out;
  out.early_mean_cases = early / episodes;
  out.late_mean_cases = late / episodes;
  out.growing = out.late_mean_cases > 2.0 * out.early_mean_cases + 1.0;
  return out;
}

}  // namespace dtap

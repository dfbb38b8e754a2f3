#include "dtap/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "dtap/event_log.hpp"

namespace dtap {

namespace {

std::string format_double(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

ReplicationResult to_result(const EpisodeRun& run, const std::string& policy, const ReplicationOptions& options,
                            double horizon) {
  const auto audit = audit_theorem1(run.summary);
  if (!audit.passed) {
    throw AuditFailure("reward audit failed for seed " + std::to_string(run.summary.seed) + ": residual " +
                       format_double(audit.residual) + " > " + format_double(audit.tolerance));
  }
  if (run.invariant_violations > 0) {
    throw AuditFailure("state invariants violated " + std::to_string(run.invariant_violations) + " times for seed " +
                       std::to_string(run.summary.seed) +
                       (run.violation_messages.empty() ? std::string() : ": " + run.violation_messages.front()));
  }
  ReplicationResult r;
  r.seed = run.summary.seed;
  r.policy = policy;
  r.instance = options.instance_name;
  r.horizon_hours = horizon;
  r.cases = run.summary.case_count;
  r.completed = run.summary.completed;
  r.mean_cycle = run.summary.mean_cycle;
  r.total_reward = run.summary.total_reward;
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

PolicyFactory builtin_policy_factory(const std::string& name) {
  make_builtin_policy(name);  // validate eagerly
  return [name] { return make_builtin_policy(name); };
}

std::shared_ptr<const DtapInstance> with_horizon(const std::shared_ptr<const DtapInstance>& instance, double hours) {
  if (!(hours > 0.0) || instance->horizon_hours == hours) return instance;
  auto copy = std::make_shared<DtapInstance>(*instance);
  copy->horizon_hours = hours;
  return copy;
}

std::vector<ReplicationResult> run_replications(std::shared_ptr<const DtapInstance> instance,
                                                const PolicyFactory& factory, const ReplicationOptions& options) {
  if (options.replications == 0) throw std::invalid_argument("replications must be at least 1");
  const auto inst = with_horizon(instance, options.horizon_hours);
  const std::string policy_name = factory()->name();
  std::vector<std::optional<ReplicationResult>> slots(options.replications);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= options.replications) return;
      try {
        auto policy = factory();
        const auto run = run_episode(inst, *policy, options.base_seed + i, options.engine);
        slots[i] = to_result(run, policy_name, options, inst->horizon_hours);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(options.replications);
        return;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.replications)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ReplicationResult> rows;
  rows.reserve(slots.size());
  for (auto& s : slots) rows.push_back(std::move(*s));
  return rows;
}

std::vector<ReplicationResult> run_replications_sequential(std::shared_ptr<const DtapInstance> instance,
                                                           Policy& policy, const ReplicationOptions& options) {
  if (options.replications == 0) throw std::invalid_argument("replications must be at least 1");
  const auto inst = with_horizon(instance, options.horizon_hours);
  std::vector<ReplicationResult> rows;
  for (std::size_t i = 0; i < options.replications; ++i) {
    const auto run = run_episode(inst, policy, options.base_seed + i, options.engine);
    rows.push_back(to_result(run, policy.name(), options, inst->horizon_hours));
  }
  return rows;
}

std::string replication_csv_header() {
  return "seed,policy,instance,horizon_h,cases,mean_cycle_h,total_reward,completed";
}

std::string to_csv_row(const ReplicationResult& r) {
  return std::to_string(r.seed) + ',' + csv_field(r.policy) + ',' + csv_field(r.instance) + ',' +
         format_double(r.horizon_hours) + ',' + std::to_string(r.cases) + ',' + format_double(r.mean_cycle) + ',' +
         format_double(r.total_reward) + ',' + std::to_string(r.completed);
}

void write_replications_csv(std::ostream& out, const std::vector<ReplicationResult>& rows) {
  out << replication_csv_header() << '\n';
  for (const auto& r : rows) out << to_csv_row(r) << '\n';
}

std::vector<ReplicationResult> read_replications_csv_text(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw std::runtime_error("replication CSV is empty");
  const auto& header = rows.front().fields;
  const auto column = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto mean_col = column("mean_cycle_h");
  if (!mean_col) throw std::runtime_error("replication CSV lacks column 'mean_cycle_h'");

  std::vector<ReplicationResult> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto get = [&](const char* name) -> std::string {
      const auto c = column(name);
      return c && *c < f.size() ? f[*c] : std::string();
    };
    ReplicationResult r;
    try {
      r.mean_cycle = std::stod(f.at(*mean_col));
      if (auto s = get("seed"); !s.empty()) r.seed = std::stoull(s);
      r.policy = get("policy");
      r.instance = get("instance");
      if (auto s = get("horizon_h"); !s.empty()) r.horizon_hours = std::stod(s);
      if (auto s = get("cases"); !s.empty()) r.cases = std::stoll(s);
      if (auto s = get("completed"); !s.empty()) r.completed = std::stoll(s);
      if (auto s = get("total_reward"); !s.empty()) r.total_reward = std::stod(s);
    } catch (const std::exception&) {
      throw std::runtime_error("replication CSV: bad value on line " + std::to_string(rows[i].line));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReplicationResult> read_replications_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return read_replications_csv_text(buffer.str());
}

std::vector<double> mean_cycles(const std::vector<ReplicationResult>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.mean_cycle);
  return out;
}

AgreementResult action_agreement(const std::shared_ptr<const DtapInstance>& instance, Policy& driver, Policy& other,
                                 const AgreementOptions& options) {
  if (options.samples == 0) throw std::invalid_argument("agreement needs at least one sample");
  AgreementResult result;
  std::size_t barren = 0;
  for (std::size_t ep = 0; ep < options.max_episodes && result.samples < options.samples; ++ep) {
    const std::uint64_t seed = options.seed + ep;
    Simulation sim(instance, seed, options.engine);
    driver.begin_episode(seed);
    other.begin_episode(seed);
    const std::size_t before = result.samples;
    bool finished = false;
    while (result.samples < options.samples) {
      auto step = sim.step_until_decision();
      if (std::holds_alternative<EpisodeEnd>(step)) {
        finished = true;
        break;
      }
      const auto& decision = std::get<DecisionPoint>(step);
      const auto chosen = driver.decide(decision, sim).chosen;
      if (decision.feasible.size() >= 2) {
        ++result.samples;
        result.equal += other.decide(decision, sim).chosen == chosen;
      }
      sim.apply_assignment(chosen);
    }
    ++result.episodes;
    if (finished) {
      const auto summary = sim.finalize();
      driver.end_episode(summary);
      other.end_episode(summary);
    }
    barren = result.samples == before ? barren + 1 : 0;
    if (result.samples == 0 && barren >= options.barren_episode_limit) break;
  }
  return result;
}

std::vector<CrossEvalCell> cross_eval(const std::vector<NamedInstance>& instances,
                                      const std::vector<NamedPolicy>& policies, const ReplicationOptions& options) {
  std::vector<CrossEvalCell> cells;
  for (const auto& inst : instances) {
    for (const auto& pol : policies) {
      CrossEvalCell cell{inst.name, pol.name, {}, std::nullopt};
      try {
        auto opts = options;
        opts.instance_name = inst.name;
        const auto cycles = mean_cycles(run_replications(inst.instance, pol.factory, opts));
        cell.mean_cycle = sample_stats(cycles);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_cross_eval_csv(std::ostream& out, const std::vector<CrossEvalCell>& cells) {
  std::vector<std::string> rows, columns;
  std::map<std::pair<std::string, std::string>, const CrossEvalCell*> lookup;
  for (const auto& c : cells) {
    if (std::find(rows.begin(), rows.end(), c.row) == rows.end()) rows.push_back(c.row);
    if (std::find(columns.begin(), columns.end(), c.column) == columns.end()) columns.push_back(c.column);
    lookup[{c.row, c.column}] = &c;
  }
  out << "instance";
  for (const auto& col : columns) out << ',' << csv_field(col + "_mean") << ',' << csv_field(col + "_std");
  out << '\n';
  for (const auto& row : rows) {
    out << csv_field(row);
    for (const auto& col : columns) {
      const auto it = lookup.find({row, col});
      if (it == lookup.end() || it->second->error) {
        out << ",NA,NA";
      } else {
        out << ',' << format_double(it->second->mean_cycle.mean) << ',' << format_double(it->second->mean_cycle.std_dev);
      }
    }
    out << '\n';
  }
}

}  // namespace dtap

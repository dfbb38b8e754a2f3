// dtap: mining, simulation and benchmarking front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dtap/bench.hpp"
#include "dtap/event_log.hpp"
#include "dtap/miner.hpp"
#include "dtap/reference_agent.hpp"
#include "dtap/remote.hpp"

namespace {

using namespace dtap;

struct EngineFlags {
  bool stochastic = false;
  bool determinize = false;
  std::string singletons = "off";
  bool check_invariants = false;

  void add_to(CLI::App* app) {
    auto* s = app->add_flag("--stochastic-durations", stochastic, "Sample completion times (default)");
    app->add_flag("--determinize", determinize, "Use mean completion times")->excludes(s);
    app->add_option("--auto-apply-singletons", singletons, "Apply lone feasible assignments internally")
        ->check(CLI::IsMember({"on", "off"}));
    app->add_flag("--check-invariants", check_invariants, "Check state invariants after every transition");
  }

  EngineConfig config() const {
    EngineConfig c;
    c.determinize = determinize;
    c.auto_apply_singletons = singletons == "on";
    c.check_invariants = check_invariants;
    return c;
  }
};

std::shared_ptr<const DtapInstance> load_shared(const std::string& path) {
  return std::make_shared<const DtapInstance>(load_instance(path));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

/// Built-in name, or "remote:host:port" for an agent reached over TCP.
std::unique_ptr<Policy> make_cli_policy(const std::string& spec, std::chrono::milliseconds timeout) {
  if (spec.rfind("remote:", 0) == 0) {
    return std::make_unique<RemotePolicy>(connect_tcp(parse_endpoint(spec.substr(7)), timeout), timeout);
  }
  return make_builtin_policy(spec);
}

void print_summary(const std::string& label, const std::vector<ReplicationResult>& rows) {
  const auto cycles = mean_cycles(rows);
  const auto s = sample_stats(cycles);
  std::printf("%s: n=%zu mean cycle %.4f h +- %.4f\n", label.c_str(), s.n, s.mean, s.std_dev);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic task assignment simulator and benchmark harness"};
  app.require_subcommand(1);
  int timeout_ms = static_cast<int>(kDefaultAgentTimeout.count());
  app.add_option("--agent-timeout-ms", timeout_ms, "Per-message timeout for remote agents");

  // validate
  std::string instance_path;
  auto* validate = app.add_subcommand("validate", "Check an instance file");
  validate->add_option("--instance", instance_path, "Instance JSON")->required();

  // mine
  std::string log_path, out_path, report_path;
  double lambda_scale = 1.0, mine_horizon = 168.0;
  bool probe = false;
  auto* mine = app.add_subcommand("mine", "Build an instance from an event log");
  mine->add_option("--log", log_path, "Event-log CSV")->required();
  mine->add_option("--out", out_path, "Instance JSON to write")->required();
  mine->add_option("--lambda-scale", lambda_scale, "Factor applied to the mined arrival rate")
      ->check(CLI::PositiveNumber);
  mine->add_option("--horizon-hours", mine_horizon, "Horizon stored in the instance")->check(CLI::PositiveNumber);
  mine->add_option("--report", report_path, "Write the mining report here instead of stdout");
  mine->add_flag("--probe", probe, "Run SPT on the mined instance and report whether cases pile up");

  // run
  std::string policy = "spt", endpoint;
  std::size_t replications = 1;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  EngineFlags run_engine;
  auto* run = app.add_subcommand("run", "Run seeded replications and write one CSV row per episode");
  run->add_option("--instance", instance_path, "Instance JSON")->required();
  run->add_option("--policy", policy, "Dispatching policy")->check(CLI::IsMember({"random", "fifo", "spt", "remote"}));
  run->add_option("--endpoint", endpoint, "host:port of a remote agent");
  run->add_option("--replications", replications, "Number of episodes")->check(CLI::PositiveNumber);
  run->add_option("--horizon-hours", horizon, "Episode length (default: the instance's)");
  run->add_option("--seed", seed, "Seed of the first episode");
  run->add_option("--threads", threads, "Worker threads for built-in policies");
  run->add_option("--out", out_path, "Result CSV")->required();
  run_engine.add_to(run);

  // simulate
  std::string trace_path;
  EngineFlags sim_engine;
  auto* simulate = app.add_subcommand("simulate", "Run one episode and export its event log");
  simulate->add_option("--instance", instance_path, "Instance JSON")->required();
  simulate->add_option("--policy", policy, "Dispatching policy")->check(CLI::IsMember({"random", "fifo", "spt"}));
  simulate->add_option("--horizon-hours", horizon, "Episode length (default: the instance's)");
  simulate->add_option("--seed", seed, "Episode seed");
  simulate->add_option("--log", log_path, "Event-log CSV to write")->required();
  simulate->add_option("--trace", trace_path, "Transition trace CSV to write");
  sim_engine.add_to(simulate);

  // compare
  std::string a_path, b_path;
  double alpha = 0.01;
  auto* compare = app.add_subcommand("compare", "Welch t-test on the mean cycle times of two result files");
  compare->add_option("--a", a_path, "First result CSV")->required();
  compare->add_option("--b", b_path, "Second result CSV")->required();
  compare->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));

  // agreement
  std::string policy_a = "spt", policy_b = "random";
  std::size_t samples = 1000;
  EngineFlags agree_engine;
  auto* agreement = app.add_subcommand("agreement", "Share of multi-choice decisions where two policies agree");
  agreement->add_option("--instance", instance_path, "Instance JSON")->required();
  agreement->add_option("--policy-a", policy_a, "Driving policy (random|fifo|spt|remote:host:port)");
  agreement->add_option("--policy-b", policy_b, "Compared policy (random|fifo|spt|remote:host:port)");
  agreement->add_option("--samples", samples, "Decisions to compare")->check(CLI::PositiveNumber);
  agreement->add_option("--seed", seed, "Seed of the first episode");
  agree_engine.add_to(agreement);

  // serve
  std::uint16_t port = 0;
  std::string bind = "127.0.0.1";
  std::size_t max_episodes = 0;
  bool once = false;
  EngineFlags serve_engine;
  auto* serve = app.add_subcommand("serve", "Serve episodes to an external agent over TCP");
  serve->add_option("--instance", instance_path, "Instance JSON")->required();
  serve->add_option("--port", port, "TCP port (0 = any free port)");
  serve->add_option("--bind", bind, "Listen address");
  serve->add_option("--seed", seed, "Seed of the first episode");
  serve->add_option("--horizon-hours", horizon, "Episode length (default: the instance's)");
  serve->add_option("--episodes", max_episodes, "End each session after this many episodes (0 = agent decides)");
  serve->add_flag("--once", once, "Exit after the first session");
  serve_engine.add_to(serve);

  // cross-eval
  std::vector<std::string> instance_specs, policy_specs;
  auto* cross = app.add_subcommand("cross-eval", "Evaluate every policy on every instance");
  cross->add_option("--instance", instance_specs, "name=path, repeatable")->required();
  cross->add_option("--policy", policy_specs, "random|fifo|spt, repeatable")->required();
  cross->add_option("--replications", replications, "Episodes per cell")->check(CLI::PositiveNumber);
  cross->add_option("--horizon-hours", horizon, "Episode length (default: each instance's)");
  cross->add_option("--seed", seed, "Seed of the first episode");
  cross->add_option("--threads", threads, "Worker threads");
  cross->add_option("--out", out_path, "Matrix CSV")->required();

  // spt-agent
  std::size_t agent_episodes = 1;
  auto* agent = app.add_subcommand("spt-agent", "Scripted agent that plays SPT over the wire protocol");
  agent->add_option("--endpoint", endpoint, "host:port of a server")->required();
  agent->add_option("--episodes", agent_episodes, "Episodes before stop (0 = until the server closes)");
  agent->add_option("--seed", seed, "First reset seed");

  CLI11_PARSE(app, argc, argv);
  const std::chrono::milliseconds timeout{timeout_ms};

  try {
    if (*validate) {
      const auto text = [&] {
        std::ifstream in(instance_path);
        if (!in) throw std::runtime_error("cannot open '" + instance_path + "'");
        return std::string(std::istreambuf_iterator<char>(in), {});
      }();
      try {
        const auto inst = instance_from_json_text(text);
        std::printf("valid: %zu labels, %zu resources, %zu pool pairs, lambda %.6g/h, horizon %.6g h\n",
                    inst.labels.size(), inst.resources.size(), inst.pools.size(), inst.arrival_rate,
                    inst.horizon_hours);
      } catch (const InvalidInstanceError& e) {
        std::fprintf(stderr, "invalid instance:\n%s", format_report(e.report()).c_str());
        return 1;
      }
      return 0;
    }

    if (*mine) {
      const auto log = parse_event_log(log_path);
      MiningOptions options;
      options.lambda_scale = lambda_scale;
      options.horizon_hours = mine_horizon;
      const auto result = assemble_instance(log, options);
      save_instance(result.instance, out_path);
      std::string report = format_mining_report(result.report);
      if (probe) {
        const auto p = probe_stability(result.instance, seed);
        char line[160];
        std::snprintf(line, sizeof line, "stability probe (SPT): %.3f cases early, %.3f late -> %s\n",
                      p.early_mean_cases, p.late_mean_cases, p.growing ? "GROWING, lower --lambda-scale" : "stable");
        report += line;
      }
      if (report_path.empty()) {
        std::fputs(report.c_str(), stdout);
      } else {
        open_out(report_path) << report;
      }
      return 0;
    }

    if (*run) {
      const auto inst = load_shared(instance_path);
      ReplicationOptions options;
      options.replications = replications;
      options.base_seed = seed;
      options.horizon_hours = horizon;
      options.engine = run_engine.config();
      options.threads = threads;
      options.instance_name = std::filesystem::path(instance_path).stem().string();
      std::vector<ReplicationResult> rows;
      if (policy == "remote") {
        if (endpoint.empty()) throw std::runtime_error("--policy remote needs --endpoint host:port");
        RemotePolicy remote(connect_tcp(parse_endpoint(endpoint), timeout), timeout);
        rows = run_replications_sequential(inst, remote, options);
      } else {
        rows = run_replications(inst, builtin_policy_factory(policy), options);
      }
      auto out = open_out(out_path);
      write_replications_csv(out, rows);
      print_summary(policy, rows);
      return 0;
    }

    if (*simulate) {
      auto inst = with_horizon(load_shared(instance_path), horizon);
      auto config = sim_engine.config();
      config.record_activity_log = true;
      config.record_trace = !trace_path.empty();
      auto pol = make_builtin_policy(policy);
      EpisodeRun result;
      {
        auto log_out = open_out(log_path);
        result = run_episode(inst, *pol, seed, config, [&](const Simulation& sim) {
          write_event_log(log_out, sim.activity_log(), sim.instance());
          if (!trace_path.empty()) {
            auto trace_out = open_out(trace_path);
            trace_out << trace_csv_header() << '\n';
            for (const auto& r : sim.trace()) trace_out << to_csv_row(r) << '\n';
          }
        });
      }
      std::printf("cases %lld, completed %lld, mean cycle %.4f h\n", static_cast<long long>(result.summary.case_count),
                  static_cast<long long>(result.summary.completed), result.summary.mean_cycle);
      return 0;
    }

    if (*compare) {
      const auto a = mean_cycles(read_replications_csv(a_path));
      const auto b = mean_cycles(read_replications_csv(b_path));
      const auto sa = sample_stats(a), sb = sample_stats(b);
      const auto w = welch_t_test(a, b, alpha);
      std::printf("a: n=%zu mean %.6g std %.6g\nb: n=%zu mean %.6g std %.6g\n", sa.n, sa.mean, sa.std_dev, sb.n,
                  sb.mean, sb.std_dev);
      std::printf("t=%.6g dof=%.6g p=%.6g significant=%s (alpha %.3g)\n", w.t, w.dof, w.p,
                  w.significant ? "yes" : "no", alpha);
      if (w.significant) std::printf("lower mean cycle: %s\n", sa.mean < sb.mean ? "a" : "b");
      return 0;
    }

    if (*agreement) {
      const auto inst = load_shared(instance_path);
      auto pa = make_cli_policy(policy_a, timeout);
      auto pb = make_cli_policy(policy_b, timeout);
      AgreementOptions options;
      options.samples = samples;
      options.seed = seed;
      options.engine = agree_engine.config();
      const auto r = action_agreement(inst, *pa, *pb, options);
      if (!r.defined()) {
        std::printf("agreement undefined: no decision with two or more alternatives in %zu episodes\n", r.episodes);
        return 1;
      }
      std::printf("agreement %.4f (%zu of %zu decisions, %zu episodes)\n", r.fraction(), r.equal, r.samples,
                  r.episodes);
      return 0;
    }

    if (*serve) {
      const auto inst = with_horizon(load_shared(instance_path), horizon);
      TcpListener listener(port, bind);
      std::fprintf(stderr, "listening on %s:%u\n", bind.c_str(), static_cast<unsigned>(listener.port()));
      SessionOptions options;
      options.engine = serve_engine.config();
      options.seed = seed;
      options.timeout = timeout;
      options.max_episodes = max_episodes;
      int status = 0;
      do {
        auto channel = listener.accept(std::chrono::hours(24 * 365));
        if (!channel) continue;
        const auto report = serve_session(inst, *channel, options);
        std::fprintf(stderr, "session: %zu episodes%s\n", report.episodes.size(),
                     report.stopped_by_agent ? ", stopped by agent" : "");
        if (report.error) {
          std::fprintf(stderr, "session aborted: %s\n", report.diagnostic.c_str());
          status = 1;
        }
      } while (!once);
      return status;
    }

    if (*cross) {
      std::vector<NamedInstance> instances;
      for (const auto& spec : instance_specs) {
        const auto eq = spec.find('=');
        const std::string name = eq == std::string::npos ? std::filesystem::path(spec).stem().string() : spec.substr(0, eq);
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        instances.push_back({name, load_shared(path)});
      }
      std::vector<NamedPolicy> policies;
      for (const auto& p : policy_specs) policies.push_back({p, builtin_policy_factory(p)});
      ReplicationOptions options;
      options.replications = replications;
      options.base_seed = seed;
      options.horizon_hours = horizon;
      options.threads = threads;
      const auto cells = cross_eval(instances, policies, options);
      auto out = open_out(out_path);
      write_cross_eval_csv(out, cells);
      int status = 0;
      for (const auto& c : cells) {
        if (c.error) {
          std::fprintf(stderr, "cell %s/%s failed: %s\n", c.row.c_str(), c.column.c_str(), c.error->c_str());
          status = 1;
        }
      }
      return status;
    }

    if (*agent) {
      auto channel = connect_tcp(parse_endpoint(endpoint), timeout);
      MimicOptions options;
      options.episodes = agent_episodes;
      options.reset_seed = seed;
      options.timeout = timeout;
      const auto r = run_spt_mimic(channel, options);
      std::printf("decisions %zu, episodes %zu\n", r.decisions, r.episodes);
      for (std::size_t i = 0; i < r.summaries.size(); ++i) {
        std::printf("episode %zu: reward %.6f, mean cycle %.4f h\n", i, r.episode_rewards[i],
                    r.summaries[i].value("mean_cycle_h", 0.0));
      }
      if (r.error_code) {
        std::fprintf(stderr, "server error: %s\n", r.error_code->c_str());
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

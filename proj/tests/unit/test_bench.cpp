#include <gtest/gtest.h>

#include <sstream>

#include "dtap/bench.hpp"
#include "fixtures.hpp"

namespace dtap {
namespace {

ReplicationOptions options(std::size_t n, unsigned threads = 1) {
  ReplicationOptions o;
  o.replications = n;
  o.base_seed = 100;
  o.threads = threads;
  o.instance_name = "toy";
  return o;
}

TEST(Replications, SameSeedSameRows) {
  const auto inst = testing::share(testing::toy_two_label());
  const auto a = run_replications(inst, builtin_policy_factory("random"), options(4));
  const auto b = run_replications(inst, builtin_policy_factory("random"), options(4));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0].seed, 100u);
  EXPECT_EQ(a[3].seed, 103u);
  EXPECT_EQ(a[0].policy, "random");
  EXPECT_EQ(a[0].instance, "toy");
  EXPECT_NE(a[0].mean_cycle, a[1].mean_cycle);
}

TEST(Replications, ThreadCountDoesNotChangeRows) {
  const auto inst = testing::share(testing::toy_two_label());
  for (const char* name : {"random", "fifo", "spt"}) {
    EXPECT_EQ(run_replications(inst, builtin_policy_factory(name), options(6, 1)),
              run_replications(inst, builtin_policy_factory(name), options(6, 3)))
        << name;
  }
}

TEST(Replications, HorizonOverride) {
  const auto inst = testing::share(testing::toy_two_label());
  auto o = options(1);
  o.horizon_hours = 24.0;
  const auto rows = run_replications(inst, builtin_policy_factory("spt"), o);
  EXPECT_EQ(rows[0].horizon_hours, 24.0);
  EXPECT_LT(rows[0].cases, 60);
  EXPECT_EQ(with_horizon(inst, 0.0), inst);
}

TEST(Replications, RejectsZeroAndUnknownPolicy) {
  const auto inst = testing::share(testing::toy_two_label());
  EXPECT_THROW(run_replications(inst, builtin_policy_factory("spt"), options(0)), std::invalid_argument);
  EXPECT_THROW(builtin_policy_factory("nope"), std::invalid_argument);
}

TEST(Replications, ResultMatchesEpisodeSummary) {
  const auto inst = testing::share(testing::toy_two_label());
  const auto rows = run_replications(inst, builtin_policy_factory("fifo"), options(1));
  FifoPolicy fifo;
  const auto run = run_episode(inst, fifo, 100, {});
  EXPECT_EQ(rows[0].cases, run.summary.case_count);
  EXPECT_EQ(rows[0].completed, run.summary.completed);
  EXPECT_EQ(rows[0].mean_cycle, run.summary.mean_cycle);
  EXPECT_EQ(rows[0].total_reward, run.summary.total_reward);
}

TEST(Csv, RoundTrip) {
  const auto inst = testing::share(testing::toy_two_label());
  auto rows = run_replications(inst, builtin_policy_factory("spt"), options(3));
  rows[1].instance = "needs, \"quoting\"";
  std::ostringstream out;
  write_replications_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, replication_csv_header().size()), replication_csv_header());
  EXPECT_EQ(read_replications_csv_text(out.str()), rows);
}

TEST(Csv, HeaderColumns) {
  EXPECT_EQ(replication_csv_header(), "seed,policy,instance,horizon_h,cases,mean_cycle_h,total_reward,completed");
}

TEST(Csv, OnlyMeanCycleIsRequired) {
  const auto rows = read_replications_csv_text("mean_cycle_h,other\n1.5,x\n2.5,y\n");
  EXPECT_EQ(mean_cycles(rows), (std::vector<double>{1.5, 2.5}));
  EXPECT_THROW(read_replications_csv_text("seed\n1\n"), std::runtime_error);
  EXPECT_THROW(read_replications_csv_text("mean_cycle_h\nabc\n"), std::runtime_error);
  EXPECT_THROW(read_replications_csv("/nonexistent/rows.csv"), std::runtime_error);
}

TEST(Agreement, PolicyWithItselfIsOne) {
  const auto inst = testing::share(testing::toy_two_label());
  SptPolicy a, b;
  AgreementOptions o;
  o.samples = 300;
  const auto r = action_agreement(inst, a, b, o);
  EXPECT_EQ(r.samples, 300u);
  EXPECT_EQ(r.equal, 300u);
  EXPECT_DOUBLE_EQ(r.fraction(), 1.0);
}

TEST(Agreement, UndefinedWithoutChoices) {
  // One resource, one activity: every decision is a singleton.
  auto inst = testing::skeleton({"A"}, 1, 1);
  testing::add_pool(inst, 1, 0, 0.5, 0.1);
  inst.transitions.rows[0][1] = 1.0;
  inst.transitions.rows[1][2] = 1.0;
  inst.horizon_hours = 10.0;
  SptPolicy a;
  RandomPolicy b;
  AgreementOptions o;
  o.samples = 10;
  o.barren_episode_limit = 5;
  const auto r = action_agreement(testing::share(inst), a, b, o);
  EXPECT_FALSE(r.defined());
  EXPECT_EQ(r.episodes, 5u);
  EXPECT_EQ(r.fraction(), 0.0);
}

TEST(CrossEval, FullMatrixWithFailedCell) {
  const auto toy = testing::share(testing::toy_two_label());
  const auto het = testing::share(testing::heterogeneous());
  const PolicyFactory broken = []() -> std::unique_ptr<Policy> { throw std::runtime_error("agent offline"); };
  const std::vector<NamedPolicy> policies{{"spt", builtin_policy_factory("spt")}, {"broken", broken}};
  const auto cells = cross_eval({{"toy", toy}, {"het", het}}, policies, options(3));
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_FALSE(cells[0].error);
  EXPECT_EQ(cells[0].mean_cycle.n, 3u);
  EXPECT_TRUE(cells[1].error);
  EXPECT_EQ(cells[2].row, "het");

  std::ostringstream out;
  write_cross_eval_csv(out, cells);
  std::istringstream lines(out.str());
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(header, "instance,spt_mean,spt_std,broken_mean,broken_std");
  EXPECT_EQ(first.substr(0, 4), "toy,");
  EXPECT_EQ(first.substr(first.size() - 6), ",NA,NA");
  EXPECT_EQ(second.substr(0, 4), "het,");
}

}  // namespace
}  // namespace dtap

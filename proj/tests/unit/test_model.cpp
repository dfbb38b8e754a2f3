#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dtap/model.hpp"
#include "fixtures.hpp"

namespace dtap {
namespace {

using testing::toy_two_label;

TEST(Validate, WellFormedToyHasEmptyReport) {
  EXPECT_TRUE(validate_instance(toy_two_label()).empty());
  EXPECT_TRUE(validate_instance(testing::fig5()).empty());
}

TEST(Validate, RowSummingToPointNineIsNotStochastic) {
  auto inst = toy_two_label();
  inst.transitions.rows[1][2] = 0.5;  // 0.5 + 0.4
  const auto report = validate_instance(inst);
  EXPECT_TRUE(has_violation(report, ViolationCode::ROW_NOT_STOCHASTIC)) << format_report(report);
}

TEST(Validate, NoEndReachable) {
  auto inst = toy_two_label();
  inst.transitions.rows[1] = {0, 0, 1.0, 0};
  inst.transitions.rows[2] = {0, 1.0, 0, 0};
  EXPECT_TRUE(has_violation(validate_instance(inst), ViolationCode::NO_END_REACHABLE));
}

TEST(Validate, StartAsTargetAndMarkerPools) {
  auto inst = toy_two_label();
  inst.transitions.rows[2] = {0.3, 0, 0, 0.7};
  testing::add_pool(inst, 3, 0, 1.0, 0.0);
  const auto report = validate_instance(inst);
  EXPECT_TRUE(has_violation(report, ViolationCode::START_AS_TARGET));
  EXPECT_TRUE(has_violation(report, ViolationCode::POOL_ON_MARKER));
}

TEST(Validate, EmptyPoolAndCompletionMismatch) {
  auto inst = toy_two_label();
  inst.pools.erase(inst.pools.begin() + 2, inst.pools.end());
  EXPECT_TRUE(has_violation(validate_instance(inst), ViolationCode::EMPTY_POOL));
  EXPECT_TRUE(has_violation(validate_instance(inst), ViolationCode::COMPLETION_MISMATCH));
}

TEST(Validate, ScalarFields) {
  auto inst = toy_two_label();
  inst.arrival_rate = 0.0;
  inst.horizon_hours = -1.0;
  inst.calendar.expected_active.clear();
  inst.resources[0].weight = 0;
  inst.completion[0].std_dev = -0.1;
  const auto report = validate_instance(inst);
  EXPECT_TRUE(has_violation(report, ViolationCode::BAD_ARRIVAL_RATE));
  EXPECT_TRUE(has_violation(report, ViolationCode::BAD_HORIZON));
  EXPECT_TRUE(has_violation(report, ViolationCode::EMPTY_CALENDAR));
  EXPECT_TRUE(has_violation(report, ViolationCode::BAD_WEIGHT));
  EXPECT_TRUE(has_violation(report, ViolationCode::BAD_COMPLETION_MODEL));
}

TEST(Validate, SeveralEndLabelsAreAllowed) {
  auto inst = toy_two_label();
  inst.labels.push_back({4, "End2", LabelKind::end});
  for (auto& row : inst.transitions.rows) row.push_back(0.0);
  inst.transitions.rows.push_back(std::vector<double>(5, 0.0));
  inst.transitions.rows[2][3] = 0.3;
  inst.transitions.rows[2][4] = 0.4;
  EXPECT_TRUE(validate_instance(inst).empty()) << format_report(validate_instance(inst));
}

TEST(HourOfWeek, Examples) {
  Calendar cal;
  cal.expected_active.assign(168, 1);
  EXPECT_EQ(hour_of_week(0.0, cal), 0);
  EXPECT_EQ(hour_of_week(167.9, cal), 167);
  EXPECT_EQ(hour_of_week(168.5, cal), 0);
  cal.expected_active.assign(24, 1);
  EXPECT_EQ(hour_of_week(49.0, cal), 1);
}

void expect_same(const DtapInstance& a, const DtapInstance& b) {
  ASSERT_EQ(a.labels.size(), b.labels.size());
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    EXPECT_EQ(a.labels[i].id, b.labels[i].id);
    EXPECT_EQ(a.labels[i].name, b.labels[i].name);
    EXPECT_EQ(a.labels[i].kind, b.labels[i].kind);
  }
  ASSERT_EQ(a.resources.size(), b.resources.size());
  for (std::size_t i = 0; i < a.resources.size(); ++i) {
    EXPECT_EQ(a.resources[i].name, b.resources[i].name);
    EXPECT_EQ(a.resources[i].weight, b.resources[i].weight);
  }
  EXPECT_EQ(a.pools, b.pools);
  ASSERT_EQ(a.completion.size(), b.completion.size());
  const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
  for (std::size_t i = 0; i < a.completion.size(); ++i) {
    EXPECT_TRUE(close(a.completion[i].mean, b.completion[i].mean));
    EXPECT_TRUE(close(a.completion[i].std_dev, b.completion[i].std_dev));
  }
  for (std::size_t i = 0; i < a.transitions.rows.size(); ++i) {
    for (std::size_t j = 0; j < a.transitions.rows[i].size(); ++j) {
      EXPECT_TRUE(close(a.transitions.rows[i][j], b.transitions.rows[i][j])) << i << "->" << j;
    }
  }
  EXPECT_EQ(a.calendar.expected_active, b.calendar.expected_active);
  EXPECT_TRUE(close(a.arrival_rate, b.arrival_rate));
  EXPECT_TRUE(close(a.horizon_hours, b.horizon_hours));
}

TEST(InstanceIo, ToyRoundTripIsFieldIdentical) {
  const auto inst = toy_two_label();
  const auto path = std::filesystem::temp_directory_path() / "dtap_toy_roundtrip.json";
  save_instance(inst, path);
  expect_same(inst, load_instance(path));
  std::filesystem::remove(path);
}

TEST(InstanceIo, RandomInstancesRoundTrip) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = testing::random_instance(seed);
    ASSERT_TRUE(validate_instance(inst).empty()) << seed << "\n" << format_report(validate_instance(inst));
    expect_same(inst, instance_from_json_text(instance_to_json_text(inst)));
  }
}

TEST(InstanceIo, MissingArrivalRateNamesTheField) {
  auto text = instance_to_json_text(toy_two_label());
  const auto pos = text.find("\"arrival_rate\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, std::string("\"arrival_rate\"").size(), "\"arrival_rat\"");
  try {
    instance_from_json_text(text);
    FAIL() << "expected a parse error";
  } catch (const InstanceError& e) {
    EXPECT_NE(std::string(e.what()).find("arrival_rate"), std::string::npos) << e.what();
  }
}

TEST(InstanceIo, SyntaxErrorReportsLine) {
  try {
    instance_from_json_text("{\n  \"labels\": [\n  ,\n]}");
    FAIL();
  } catch (const InstanceError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(InstanceIo, SmallRoundingIsRenormalizedLargeIsRejected) {
  auto inst = toy_two_label();
  inst.transitions.rows[1][2] = 0.6 + 5e-7;
  const auto loaded = instance_from_json_text(instance_to_json_text(inst));
  EXPECT_NEAR(loaded.transitions.rows[1][2] + loaded.transitions.rows[1][3], 1.0, 1e-15);

  inst.transitions.rows[1][2] = 0.61;
  try {
    instance_from_json_text(instance_to_json_text(inst));
    FAIL();
  } catch (const InvalidInstanceError& e) {
    EXPECT_TRUE(has_violation(e.report(), ViolationCode::ROW_NOT_STOCHASTIC));
  }
}

TEST(InstanceIo, CompletionForUnknownPairIsAFieldError) {
  auto text = instance_to_json_text(toy_two_label());
  const auto pos = text.find("\"resource_id\": 2");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 16, "\"resource_id\": 0");
  EXPECT_THROW(instance_from_json_text(text), InstanceError);
}

TEST(InstanceIo, MissingFileThrows) {
  EXPECT_THROW(load_instance("/nonexistent/dtap.json"), InstanceError);
}

TEST(Instance, Lookups) {
  const auto inst = testing::fig5();
  EXPECT_EQ(inst.start_label(), 0);
  EXPECT_TRUE(inst.is_end(3));
  EXPECT_EQ(inst.pool_index({2, 1}), std::optional<std::size_t>(2));
  EXPECT_FALSE(inst.pool_index({2, 0}));
  EXPECT_DOUBLE_EQ(inst.completion_of({1, 0}).mean, 2.0);
  EXPECT_THROW(inst.completion_of({2, 0}), InstanceError);
  EXPECT_EQ(inst.find_label("beta"), std::optional<LabelId>(2));
  EXPECT_EQ(inst.find_resource("c"), std::optional<ResourceId>(2));
}

}  // namespace
}  // namespace dtap

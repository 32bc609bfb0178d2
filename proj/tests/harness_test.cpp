#include <gtest/gtest.h>

#include <sstream>

#include "bidprice/config_file.hpp"
#include "bidprice/harness.hpp"

using namespace bidprice;

namespace {

template <typename Config>
Config tiny(Config c) {
  c.n_scenarios = 4;
  c.n_flights = 20;
  c.capacity = 8;
  c.horizon_days = 10;
  c.n_dcps = 5;
  c.estimator.kind = EstimatorKind::simple_average;
  return c;
}

int count_policy(const std::vector<ExperimentResult>& results, PolicyKind policy) {
  return static_cast<int>(std::count_if(results.begin(), results.end(),
                                        [&](const ExperimentResult& r) { return r.policy == policy; }));
}

ExperimentResult row(int id, double train, double test, PolicyKind policy, double revenue, double gap) {
  return {id, train, test, policy, revenue, 0.9, gap, gap / 10};
}

}  // namespace

TEST(RunBaseline, ShapeAndOptimalReference) {
  auto config = tiny(BaselineConfig{});
  config.lambda_range = {0.5, 1.0};
  const auto run = run_baseline(config);
  EXPECT_TRUE(run.failures.empty());
  EXPECT_EQ(count_policy(run.results, PolicyKind::optimal), 4);
  EXPECT_EQ(count_policy(run.results, PolicyKind::data_driven), 4);
  for (const auto& r : run.results) {
    EXPECT_EQ(r.lambda_train, r.lambda_test);
    EXPECT_GE(r.lambda_test, 0.5);
    EXPECT_LE(r.lambda_test, 1.0);
    if (r.policy == PolicyKind::optimal) {
      EXPECT_EQ(r.revenue_gap_vs_optimal, 0.0);
      EXPECT_EQ(r.load_factor_gap_vs_optimal, 0.0);
    }
  }
}

TEST(RunBaseline, DeterministicAcrossWorkerCounts) {
  auto config = tiny(BaselineConfig{});
  const auto a = run_baseline(config);
  config.workers = 3;
  const auto b = run_baseline(config);
  EXPECT_EQ(a.results, b.results);
  EXPECT_EQ(a.outcomes_csv, b.outcomes_csv);
}

TEST(RunBaseline, NeuralEstimatorRuns) {
  auto config = tiny(BaselineConfig{});
  config.n_scenarios = 1;
  config.estimator.kind = EstimatorKind::neural;
  config.estimator.hidden_layer_sizes = {16, 8};
  const auto run = run_baseline(config);
  EXPECT_TRUE(run.failures.empty());
  EXPECT_EQ(run.results.size(), 2u);
}

TEST(RunBaseline, FailedScenariosAreCollected) {
  auto config = tiny(BaselineConfig{});
  config.n_scenarios = 8;
  config.dt = 0.05;  // rejected by the DP whenever lambda > 2
  config.lambda_range = {1.0, 3.0};
  const auto run = run_baseline(config);
  EXPECT_FALSE(run.failures.empty());
  EXPECT_EQ(run.failures.size() + run.results.size() / 2, 8u);
  for (const auto& f : run.failures) EXPECT_NE(f.message.find("dt"), std::string::npos) << f.message;
}

TEST(RunRobustness, ShapeAndRatioRange) {
  auto config = tiny(RobustnessConfig{});
  const auto run = run_robustness(config);
  ASSERT_TRUE(run.failures.empty());
  EXPECT_EQ(run.results.size(), 12u);
  for (const auto& r : run.results) {
    EXPECT_TRUE(config.lambda_train_range.contains(r.lambda_train));
    EXPECT_TRUE(config.lambda_test_range.contains(r.lambda_test));
    EXPECT_TRUE(config.ratio_range.contains(r.lambda_test / r.lambda_train));
  }
}

TEST(RunRobustness, MatchedRatioMakesMisspecifiedOptimal) {
  auto config = tiny(RobustnessConfig{});
  config.lambda_train_range = {1.0, 1.0};
  config.lambda_test_range = {1.0, 1.0};
  config.ratio_range = {1.0, 1.0};
  const auto run = run_robustness(config);
  for (const auto& r : run.results)
    if (r.policy == PolicyKind::misspecified_dp) {
      EXPECT_EQ(r.revenue_gap_vs_optimal, 0.0);
      EXPECT_EQ(r.load_factor_gap_vs_optimal, 0.0);
    }
}

TEST(RunRobustness, RejectsImpossibleRatioRange) {
  auto config = tiny(RobustnessConfig{});
  config.lambda_train_range = {3.0, 3.0};
  config.lambda_test_range = {1.0, 1.2};
  EXPECT_THROW(run_robustness(config), std::invalid_argument);
}

TEST(Summarize, SingleRowIsItsOwnAggregate) {
  const ExperimentResult r = row(0, 3, 3, PolicyKind::data_driven, 500, -0.02);
  const auto rows = summarize(std::span(&r, 1), GroupBy::lambda);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].bucket(), 3.0);
  EXPECT_EQ(rows[0].mean_revenue, 500);
  EXPECT_EQ(rows[0].mean_revenue_gap, -0.02);
  EXPECT_EQ(rows[0].min_revenue_gap, -0.02);
  EXPECT_EQ(rows[0].max_load_factor_gap, -0.002);
}

TEST(Summarize, RatioBucketing) {
  EXPECT_EQ(bucket_tenths(1.04), 10);
  EXPECT_EQ(bucket_tenths(1.06), 11);
  const std::vector<ExperimentResult> results{row(0, 2.5, 2.6, PolicyKind::misspecified_dp, 400, -0.01),
                                              row(0, 2.5, 2.6, PolicyKind::data_driven, 380, -0.03)};
  const auto rows = summarize(results, GroupBy::ratio);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_EQ(r.bucket_tenths, 10);
  const auto& dd = rows[0].policy == PolicyKind::data_driven ? rows[0] : rows[1];
  ASSERT_TRUE(dd.revenue_ratio_vs_misspecified);
  EXPECT_DOUBLE_EQ(*dd.revenue_ratio_vs_misspecified, 0.95);
}

TEST(Summarize, OptimalRowsHaveZeroGaps) {
  std::vector<ExperimentResult> results;
  for (int i = 0; i < 10; ++i) results.push_back(row(i, 2 + i * 0.1, 2 + i * 0.1, PolicyKind::optimal, 100 + i, 0));
  for (const auto& r : summarize(results, GroupBy::lambda)) {
    EXPECT_EQ(r.mean_revenue_gap, 0.0);
    EXPECT_EQ(r.min_load_factor_gap, 0.0);
    EXPECT_EQ(r.max_revenue_gap, 0.0);
  }
}

TEST(Summarize, EmptyThrows) {
  EXPECT_THROW(summarize({}, GroupBy::ratio), std::invalid_argument);
  EXPECT_THROW(parse_group_by("day"), std::invalid_argument);
}

TEST(ResultsCsv, RoundTrip) {
  const auto run = run_robustness(tiny(RobustnessConfig{}));
  std::stringstream text;
  write_results_csv(text, run.results);
  EXPECT_EQ(read_results_csv(text), run.results);
}

TEST(ConfigFile, ParsesAndOverlays) {
  std::stringstream in(
      "# desk run\n"
      "n_scenarios = 7\n"
      "lambda_range = 1.5, 2.5  # comment\n"
      "lambda_test_range = 1, 4\n"
      "estimator.kind = simple_average\n"
      "estimator.hidden_layer_sizes = 64, 8\n"
      "master_seed = 99\n");
  const auto kv = parse_key_values(in);
  BaselineConfig baseline;
  apply_config(kv, baseline);
  EXPECT_EQ(baseline.n_scenarios, 7);
  EXPECT_EQ(baseline.lambda_range, (Range{1.5, 2.5}));
  EXPECT_EQ(baseline.estimator.kind, EstimatorKind::simple_average);
  EXPECT_EQ(baseline.estimator.hidden_layer_sizes, (std::vector<int>{64, 8}));
  EXPECT_EQ(baseline.master_seed, 99u);
  RobustnessConfig robustness;
  apply_config(kv, robustness);
  EXPECT_EQ(robustness.lambda_test_range, (Range{1, 4}));
  EXPECT_EQ(robustness.lambda_train_range, (Range{2.4, 3.6}));
}

TEST(ConfigFile, RejectsBadInput) {
  std::stringstream unknown("n_scenario = 3\n");
  EXPECT_THROW(parse_key_values(unknown), ConfigError);
  std::stringstream duplicate("alpha = 1\nalpha = 2\n");
  EXPECT_THROW(parse_key_values(duplicate), ConfigError);
  std::stringstream no_equals("alpha 1\n");
  EXPECT_THROW(parse_key_values(no_equals), ConfigError);
  std::stringstream bad_value("capacity = lots\n");
  BaselineConfig c;
  EXPECT_THROW(apply_config(parse_key_values(bad_value), c), ConfigError);
}

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "bidprice/demand_model.hpp"
#include "support/properties.hpp"

using namespace bidprice;

TEST(PurchaseProbability, MatchesExponentialSurvival) {
  EXPECT_EQ(purchase_probability(50, 50, 100), 1.0);
  EXPECT_NEAR(purchase_probability(150, 50, 100), 0.367879441171, 1e-12);
  EXPECT_EQ(purchase_probability(40, 50, 100), 1.0);
}

TEST(PurchaseProbability, RejectsBadAlpha) {
  EXPECT_THROW(purchase_probability(10, 0, 0), std::invalid_argument);
  EXPECT_THROW(purchase_probability(10, 0, -1), std::invalid_argument);
  EXPECT_THROW(purchase_probability(10, 0, std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(purchase_probability(std::nan(""), 0, 10), std::invalid_argument);
}

TEST(PurchaseProbability, NonincreasingInPrice) {
  EXPECT_EQ(props::purchase_probability_monotone(1000, 11), "");
}

TEST(SampleWtp, DegenerateAtZeroAlpha) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_wtp(42.5, 0.0, rng), 42.5);
}

TEST(SampleWtp, NeverBelowFloorAndMeanIsFloorPlusAlpha) {
  Rng rng(2024);
  constexpr int kDraws = 1'000'000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double w = sample_wtp(50, 100, rng);
    ASSERT_GE(w, 50.0);
    sum += w;
  }
  const double mean = sum / kDraws;
  EXPECT_GE(mean, 149.5);
  EXPECT_LE(mean, 150.5);
}

TEST(SampleWtp, EmpiricalSurvivalMatchesPurchaseProbability) {
  EXPECT_EQ(props::wtp_survival_agreement(20, 3), "");
}

TEST(ArrivalStream, ZeroRateIsEmpty) {
  const auto stream = sample_arrival_stream({0.0, 100, 50, 10, 30}, 9);
  EXPECT_TRUE(stream.arrivals.empty());
}

TEST(ArrivalStream, SortedInsideHorizonAboveFloor) {
  const DemandScenario scenario{3.0, 100, 50, 100, 300};
  const auto stream = sample_arrival_stream(scenario, 77);
  ASSERT_FALSE(stream.arrivals.empty());
  for (std::size_t i = 0; i < stream.arrivals.size(); ++i) {
    const auto& a = stream.arrivals[i];
    EXPECT_GE(a.time_to_departure, 0.0);
    EXPECT_LT(a.time_to_departure, 300.0);
    EXPECT_GE(a.wtp, 50.0);
    if (i) EXPECT_LT(a.time_to_departure, stream.arrivals[i - 1].time_to_departure);
  }
}

TEST(ArrivalStream, DeterministicPerSeed) {
  const DemandScenario scenario{2.0, 80, 30, 20, 50};
  EXPECT_EQ(sample_arrival_stream(scenario, 5), sample_arrival_stream(scenario, 5));
  EXPECT_NE(sample_arrival_stream(scenario, 5).arrivals, sample_arrival_stream(scenario, 6).arrivals);
}

TEST(ArrivalStream, CountMomentsMatchPoisson) {
  const DemandScenario scenario{3.0, 100, 50, 100, 300};
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 1000; ++s)
    counts.push_back(static_cast<double>(sample_arrival_stream(scenario, derive_seed(99, s)).arrivals.size()));
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= counts.size();
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= counts.size() - 1;
  EXPECT_GE(mean, 870);
  EXPECT_LE(mean, 930);
  EXPECT_GE(var, 700);
  EXPECT_LE(var, 1100);
}

// Chi-squared goodness of fit of 1000 stream counts to Poisson(lambda * H),
// with bins merged until each expects at least 5 counts.
static void expect_poisson_counts(const DemandScenario& scenario) {
  const double mu = scenario.lambda_per_day * scenario.horizon_days;
  constexpr int kStreams = 1000;
  std::vector<int> observed(static_cast<std::size_t>(2 * mu + 50), 0);
  for (int s = 0; s < kStreams; ++s) {
    const auto n = sample_arrival_stream(scenario, derive_seed(1234, s)).arrivals.size();
    ++observed[std::min<std::size_t>(n, observed.size() - 1)];
  }
  const boost::math::poisson_distribution<double> poisson(mu);
  std::vector<double> bin_expected;
  std::vector<double> bin_observed;
  double expected_acc = 0.0, observed_acc = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double p = k + 1 == observed.size() ? boost::math::cdf(boost::math::complement(poisson, k - 1.0))
                                              : boost::math::pdf(poisson, static_cast<double>(k));
    expected_acc += kStreams * p;
    observed_acc += observed[k];
    if (expected_acc >= 5.0) {
      bin_expected.push_back(expected_acc);
      bin_observed.push_back(observed_acc);
      expected_acc = observed_acc = 0.0;
    }
  }
  bin_expected.back() += expected_acc;
  bin_observed.back() += observed_acc;
  double statistic = 0.0;
  for (std::size_t b = 0; b < bin_expected.size(); ++b) {
    const double d = bin_observed[b] - bin_expected[b];
    statistic += d * d / bin_expected[b];
  }
  const boost::math::chi_squared_distribution<double> chi2(static_cast<double>(bin_expected.size() - 1));
  EXPECT_LT(statistic, boost::math::quantile(chi2, 0.999)) << bin_expected.size() << " bins";
}

TEST(ArrivalStream, CountChiSquaredAgainstPoisson) {
  expect_poisson_counts({0.5, 100, 50, 10, 40});
  expect_poisson_counts({3.0, 100, 50, 100, 300});
}

TEST(DemandScenario, ValidatesFields) {
  EXPECT_THROW((DemandScenario{-1, 100, 50, 10, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((DemandScenario{1, 0, 50, 10, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((DemandScenario{1, 100, -1, 10, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((DemandScenario{1, 100, 50, 0, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((DemandScenario{1, 100, 50, 10, 0}.validate()), std::invalid_argument);
}

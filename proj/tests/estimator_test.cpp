#include <gtest/gtest.h>

#include <sstream>

#include "bidprice/estimator.hpp"
#include "support/oracles.hpp"

using namespace bidprice;

namespace {

std::vector<FlightBookings> example_flights() {
  return {{"1", {90, 70, 80}, {2, 1, 0}}, {"2", {80, 90, 70, 70}, {2, 2, 1, 0}}};
}

ObservationSet constant_set(double value, int flights, int capacity, const DcpGrid& grid) {
  ObservationSet set{capacity, {}};
  for (int f = 0; f < flights; ++f)
    for (int d : grid.boundaries())
      for (int k = 1; k <= capacity; ++k) set.rows.push_back({std::to_string(f), d, k, value});
  return set;
}

FittedEstimator table(int capacity, std::map<std::pair<int, int>, double> cells) {
  AverageModel m;
  m.capacity = capacity;
  m.cell_means = std::move(cells);
  return FittedEstimator(std::move(m));
}

EstimatorConfig small_config() {
  EstimatorConfig c;
  c.hidden_layer_sizes = {32, 16};
  c.batch_size = 16;
  return c;
}

}  // namespace

TEST(Fit, RecoversConstantTarget) {
  const DcpGrid grid({9, 6, 3, 0});
  const auto set = constant_set(120.0, 20, 6, grid);
  const auto model = fit(set, EstimatorConfig{});
  for (int k = 1; k <= 6; ++k)
    for (int d : grid.boundaries()) EXPECT_NEAR(predict_bid(model, k, d), 120.0, 1.2) << k << "," << d;
}

TEST(Fit, AllZeroTargetsPredictNearZero) {
  const DcpGrid grid({4, 2, 0});
  const auto set = constant_set(0.0, 10, 5, grid);
  const auto model = fit(set, EstimatorConfig{});
  for (int k = 1; k <= 5; ++k)
    for (int d : grid.boundaries()) EXPECT_EQ(predict_bid(model, k, d), 0.0);
  EXPECT_EQ(model.neural()->epochs_trained, 0);
}

TEST(Fit, TimedFixtureConverges) {
  const auto set = assemble_training_set(example_flights(), 5, DcpGrid({2, 1, 0}));
  EstimatorConfig config;
  config.max_epochs = 2000;
  config.early_stopping_patience = 50;
  const auto model = fit(set, config);
  EXPECT_NEAR(predict_bid(model, 1, 2), 90.0, 10.0);
}

TEST(Fit, DeterministicPerSeed) {
  const auto set = assemble_training_set(example_flights(), 5, DcpGrid({2, 1, 0}));
  const auto a = fit(set, small_config());
  const auto b = fit(set, small_config());
  EXPECT_EQ(a, b);
  for (int k = 1; k <= 5; ++k)
    for (int d = 0; d <= 2; ++d) EXPECT_EQ(predict_bid(a, k, d), predict_bid(b, k, d));
  auto other = small_config();
  other.seed = 1;
  EXPECT_NE(fit(set, other).neural()->layers, a.neural()->layers);
}

TEST(Fit, EmptyObservationsThrow) {
  EXPECT_THROW(fit(ObservationSet{5, {}}, EstimatorConfig{}), std::invalid_argument);
  EXPECT_THROW(fit_simple_average(ObservationSet{5, {}}), std::invalid_argument);
}

TEST(Fit, PredictionsNonnegativeAndRangeChecked) {
  ObservationSet set{4, {}};
  Rng rng(5);
  for (int f = 0; f < 12; ++f)
    for (int k = 1; k <= 4; ++k) set.rows.push_back({std::to_string(f), 0, k, rng.uniform(0.0, 50.0)});
  for (auto activation : {OutputActivation::softplus, OutputActivation::relu}) {
    auto config = small_config();
    config.output_activation = activation;
    const auto model = fit(set, config);
    for (int k = 1; k <= 4; ++k)
      for (int d = -50; d <= 50; d += 5) EXPECT_GE(predict_bid(model, k, d), 0.0);
    EXPECT_THROW(predict_bid(model, 0, 0), std::out_of_range);
    EXPECT_THROW(predict_bid(model, 5, 0), std::out_of_range);
  }
}

TEST(SplitFlights, DisjointByFlight) {
  ObservationSet set{3, {}};
  for (int f = 0; f < 37; ++f)
    for (int k = 1; k <= 3; ++k) set.rows.push_back({"f" + std::to_string(f), 0, k, 1.0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto split = split_flights(set, 0.2, seed);
    EXPECT_EQ(split.validation.size(), 7u);
    EXPECT_EQ(split.training.size() + split.validation.size(), 37u);
    for (const auto& id : split.validation) EXPECT_FALSE(split.training.contains(id));
  }
  // Two flights at 20% rounds down to no validation flights.
  const auto tiny = assemble_training_set(example_flights(), 5, DcpGrid({0}));
  EXPECT_TRUE(split_flights(tiny, 0.2, 0).validation.empty());
}

TEST(SimpleAverage, FlatFixtureMeans) {
  std::vector<FlightBookings> flights{{"1", {80, 70, 90}, {0, 0, 0}}, {"2", {80, 90, 70, 70}, {0, 0, 0, 0}}};
  const auto model = fit_simple_average(assemble_training_set(flights, 5, DcpGrid({0})));
  const std::vector<double> want{90, 80, 70, 35, 0};
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(predict_bid(model, k, 0), want[static_cast<std::size_t>(k - 1)]);
  EXPECT_THROW(predict_bid(model, 1, 1), std::out_of_range);
}

TEST(SimpleAverage, SingleFlightReproducesItsMatrix) {
  const auto flights = example_flights();
  const DcpGrid grid({2, 1, 0});
  const auto model = fit_simple_average(assemble_training_set(std::span(&flights[1], 1), 5, grid));
  const auto m = transform_flight(flights[1].prices, flights[1].days, 5, grid);
  for (std::size_t j = 0; j < 3; ++j)
    for (int k = 1; k <= 5; ++k) EXPECT_EQ(predict_bid(model, k, grid[j]), m.at(k, j));
}

TEST(SimpleAverage, MatchesGroupByOracle) {
  Rng rng(31);
  for (int c = 0; c < 50; ++c) {
    const int capacity = 1 + static_cast<int>(rng.below(8));
    ObservationSet set{capacity, {}};
    const int rows = 1 + static_cast<int>(rng.below(200));
    for (int r = 0; r < rows; ++r)
      set.rows.push_back({std::to_string(rng.below(10)), static_cast<int>(rng.below(5)),
                          1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(capacity))),
                          std::round(rng.uniform(0.0, 300.0))});
    const auto model = fit_simple_average(set);
    for (const auto& [cell, mean] : oracle::group_by_mean(set.rows))
      ASSERT_EQ(predict_bid(model, cell.first, cell.second), mean);
  }
}

TEST(ExpandToDaily, ConstantModelGivesIdenticalColumns) {
  const auto model = table(2, {{{1, 7}, 40.0}, {{1, 3}, 40.0}, {{2, 7}, 15.0}, {{2, 3}, 15.0}});
  const auto m = expand_to_daily(model, 2, 10, DcpGrid({7, 3}));
  EXPECT_EQ(m.origin(), MatrixOrigin::data_driven);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(m.at(1, t), 40.0);
    EXPECT_EQ(m.at(2, t), 15.0);
  }
}

TEST(ExpandToDaily, LinearMidpoint) {
  const auto model = table(1, {{{1, 10}, 0.0}, {{1, 0}, 10.0}});
  const auto m = expand_to_daily(model, 1, 15, DcpGrid({10, 0}));
  EXPECT_DOUBLE_EQ(m.at(1, 5), 5.0);
  EXPECT_EQ(m.at(1, 0), 10.0);
  EXPECT_EQ(m.at(1, 10), 0.0);
  EXPECT_EQ(m.at(1, 14), 0.0);
}

TEST(ExpandToDaily, EveryDayGridIsRawPredictions) {
  std::map<std::pair<int, int>, double> cells;
  Rng rng(8);
  for (int x = 1; x <= 3; ++x)
    for (int d = 0; d < 6; ++d) cells[{x, d}] = rng.uniform(0.0, 100.0);
  const auto m = expand_to_daily(table(3, cells), 3, 6, build_dcp_grid(6, 6));
  for (const auto& [cell, v] : cells) EXPECT_EQ(m.at(cell.first, cell.second), v);
}

TEST(ExpandToDaily, ClampsNegativeValues) {
  const auto m = expand_to_daily(table(1, {{{1, 0}, -3.0}}), 1, 2, DcpGrid({0}));
  EXPECT_EQ(m.at(1, 0), 0.0);
  EXPECT_EQ(m.at(1, 1), 0.0);
}

TEST(ExpandToDaily, ValuesStayWithinBracket) {
  Rng rng(12);
  for (int c = 0; c < 200; ++c) {
    const int horizon = 2 + static_cast<int>(rng.below(40));
    const DcpGrid grid = build_dcp_grid(horizon, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(horizon))));
    std::map<std::pair<int, int>, double> cells;
    for (int d : grid.boundaries()) cells[{1, d}] = rng.uniform(0.0, 500.0);
    const auto m = expand_to_daily(table(1, cells), 1, horizon, grid);
    for (int day = 0; day < horizon; ++day) {
      std::size_t j = 0;
      while (j + 1 < grid.size() && grid[j + 1] >= day) ++j;
      const double hi_day = cells[{1, grid[j]}];
      const double lo_day = j + 1 < grid.size() && day < grid[j] ? cells[{1, grid[j + 1]}] : hi_day;
      ASSERT_GE(m.at(1, day), std::min(hi_day, lo_day) - 1e-9) << c << " " << day;
      ASSERT_LE(m.at(1, day), std::max(hi_day, lo_day) + 1e-9) << c << " " << day;
    }
  }
}

TEST(ModelPersistence, NeuralRoundTripIsBitExact) {
  const auto set = assemble_training_set(example_flights(), 5, DcpGrid({2, 1, 0}));
  const auto model = fit(set, small_config());
  std::stringstream text;
  save_model(text, model);
  const auto loaded = load_model(text);
  EXPECT_EQ(loaded, model);
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(predict_bid(loaded, k, 1), predict_bid(model, k, 1));
}

TEST(ModelPersistence, AverageRoundTrip) {
  const auto model = fit_simple_average(assemble_training_set(example_flights(), 5, DcpGrid({2, 1, 0})));
  std::stringstream text;
  save_model(text, model);
  EXPECT_EQ(load_model(text), model);
}

TEST(ModelPersistence, RejectsForeignFiles) {
  std::stringstream text(R"({"format": "other"})");
  EXPECT_THROW(load_model(text), std::invalid_argument);
}

TEST(EstimatorConfig, Validation) {
  EstimatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.hidden_layer_sizes = {};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

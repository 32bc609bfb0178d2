#pragma once

// Exact single-leg dynamic pricing by backward induction.
//
//   V(x, t) = V(x, t - dt) + lambda dt * max_p P_w(p) (p - b(x, t - dt))
//   b(x, t) = V(x, t) - V(x - 1, t)
//
// with the inner maximization solved in closed form for exponential WTP:
// p* = max(p0, alpha + b).

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bidprice/csv.hpp"
#include "bidprice/demand_model.hpp"

namespace bidprice {

enum class MatrixOrigin { dp_optimal, data_driven };

inline const char* to_string(MatrixOrigin origin) {
  return origin == MatrixOrigin::dp_optimal ? "dp_optimal" : "data_driven";
}

inline MatrixOrigin parse_matrix_origin(std::string_view text) {
  if (text == "dp_optimal") return MatrixOrigin::dp_optimal;
  if (text == "data_driven") return MatrixOrigin::data_driven;
  throw std::invalid_argument("unknown matrix origin '" + std::string(text) + "'");
}

/// Bid prices b(x, t) for remaining capacity x in 1..C and day t in 0..T-1.
class BidPriceMatrix {
 public:
  BidPriceMatrix() = default;
  BidPriceMatrix(int capacity, int horizon_days, MatrixOrigin origin)
      : capacity_(capacity), horizon_days_(horizon_days), origin_(origin) {
    if (capacity < 1 || horizon_days < 1)
      throw std::invalid_argument("BidPriceMatrix: capacity and horizon must be >= 1");
    values_.assign(static_cast<std::size_t>(capacity) * horizon_days, 0.0);
  }

  int capacity() const noexcept { return capacity_; }
  int horizon_days() const noexcept { return horizon_days_; }
  MatrixOrigin origin() const noexcept { return origin_; }

  double& at(int remaining, int day) { return values_[index(remaining, day)]; }
  double at(int remaining, int day) const { return values_[index(remaining, day)]; }

  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const BidPriceMatrix&) const = default;

 private:
  std::size_t index(int remaining, int day) const {
    if (remaining < 1 || remaining > capacity_ || day < 0 || day >= horizon_days_)
      throw std::out_of_range("BidPriceMatrix: index (" + std::to_string(remaining) + ", " +
                              std::to_string(day) + ") outside [1," + std::to_string(capacity_) +
                              "] x [0," + std::to_string(horizon_days_ - 1) + "]");
    return static_cast<std::size_t>(remaining - 1) * horizon_days_ + day;
  }

  int capacity_ = 0;
  int horizon_days_ = 0;
  MatrixOrigin origin_ = MatrixOrigin::dp_optimal;
  std::vector<double> values_;
};

/// V(x, n) on the fine time grid t = n * dt.
class ValueFunction {
 public:
  ValueFunction() = default;
  ValueFunction(int capacity, int steps, double dt)
      : capacity_(capacity), steps_(steps), dt_(dt),
        values_(static_cast<std::size_t>(capacity + 1) * (steps + 1), 0.0) {}

  int capacity() const noexcept { return capacity_; }
  int steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  int steps_per_day() const noexcept { return static_cast<int>(std::lround(1.0 / dt_)); }

  double& at(int remaining, int step) { return values_[index(remaining, step)]; }
  double at(int remaining, int step) const { return values_[index(remaining, step)]; }

  /// Value at a whole-day boundary.
  double at_day(int remaining, int day) const { return at(remaining, day * steps_per_day()); }

 private:
  std::size_t index(int remaining, int step) const {
    if (remaining < 0 || remaining > capacity_ || step < 0 || step > steps_)
      throw std::out_of_range("ValueFunction: index out of range");
    return static_cast<std::size_t>(step) * (capacity_ + 1) + remaining;
  }

  int capacity_ = 0;
  int steps_ = 0;
  double dt_ = 1.0;
  std::vector<double> values_;  // step-major, so one time slice is contiguous
};

inline double optimal_price(double bid, double alpha, double p0) {
  if (!(bid >= 0.0)) throw std::invalid_argument("optimal_price: bid must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("optimal_price: alpha must be > 0");
  return std::max(p0, alpha + bid);
}

/// max_p P_w(p) (p - bid) using the closed-form maximizer.
inline double expected_marginal_gain(double bid, double alpha, double p0) {
  const double price = std::max(p0, alpha + bid);
  return std::exp(-(price - p0) / alpha) * (price - bid);
}

struct DpSolution {
  ValueFunction value;
  BidPriceMatrix bids;
};

inline constexpr double kDefaultDt = 0.01;

inline DpSolution compute_value_and_bid(const DemandScenario& scenario, double dt = kDefaultDt) {
  scenario.validate();
  if (!(std::isfinite(dt) && dt > 0.0)) throw std::invalid_argument("dp: dt must be > 0");
  if (scenario.lambda_per_day * dt > 0.1 + 1e-12)
    throw std::invalid_argument("dp: lambda * dt must be <= 0.1 (got " +
                                std::to_string(scenario.lambda_per_day * dt) + ")");
  const double per_day = 1.0 / dt;
  const long steps_per_day = std::lround(per_day);
  if (steps_per_day < 1 || std::abs(per_day - static_cast<double>(steps_per_day)) > 1e-9 * per_day)
    throw std::invalid_argument("dp: 1/dt must be a whole number of steps per day");

  const int capacity = scenario.capacity;
  const int horizon = scenario.horizon_days;
  const int steps = static_cast<int>(steps_per_day * horizon);
  const double rate = scenario.lambda_per_day * dt;

  DpSolution solution{ValueFunction(capacity, steps, 1.0 / static_cast<double>(steps_per_day)),
                      BidPriceMatrix(capacity, horizon, MatrixOrigin::dp_optimal)};
  ValueFunction& v = solution.value;

  for (int n = 1; n <= steps; ++n) {
    for (int x = 1; x <= capacity; ++x) {
      const double previous = v.at(x, n - 1);
      const double bid = previous - v.at(x - 1, n - 1);
      v.at(x, n) = previous + rate * expected_marginal_gain(bid, scenario.alpha, scenario.p0);
    }
  }

  BidPriceMatrix& bids = solution.bids;
  double largest = 0.0;
  for (int day = 1; day < horizon; ++day) {
    const int n = static_cast<int>(day * steps_per_day);
    for (int x = 1; x <= capacity; ++x) {
      bids.at(x, day) = v.at(x, n) - v.at(x - 1, n);
      largest = std::max(largest, std::abs(bids.at(x, day)));
    }
  }

  // Bids are nonincreasing in x and nondecreasing in t, but differencing
  // nearly equal values leaves roundoff-sized violations where bids are close
  // to zero. Project them away: running max over days, then running min over
  // seats (a min of nondecreasing rows stays nondecreasing). Anything bigger
  // than roundoff is a real defect.
  const double roundoff = 1e-9 * (1.0 + largest);
  const auto settle = [&](double& target, double bound, bool above) {
    const double excess = above ? bound - target : target - bound;
    if (excess <= 0.0) return;
    if (excess > roundoff) throw std::logic_error("dp: bid matrix is not monotone");
    target = bound;
  };
  for (int x = 1; x <= capacity; ++x)
    for (int day = 1; day < horizon; ++day) settle(bids.at(x, day), bids.at(x, day - 1), true);
  for (int x = 2; x <= capacity; ++x)
    for (int day = 0; day < horizon; ++day) settle(bids.at(x, day), bids.at(x - 1, day), false);
  return solution;
}

/// Bid price for `remaining` seats on `day`. Zero remaining capacity is the
/// caller's concern.
inline double bid_price_lookup(const BidPriceMatrix& matrix, int remaining, int day) {
  return matrix.at(remaining, day);
}

// CSV layout:
//   capacity,horizon_days,origin
//   <C>,<T>,<origin>
//   then C rows (x = 1..C) of T values for days 0..T-1.
inline void write_bid_matrix_csv(std::ostream& out, const BidPriceMatrix& matrix) {
  out << "capacity,horizon_days,origin\n";
  out << matrix.capacity() << ',' << matrix.horizon_days() << ',' << to_string(matrix.origin())
      << '\n';
  for (int x = 1; x <= matrix.capacity(); ++x) {
    for (int t = 0; t < matrix.horizon_days(); ++t) {
      if (t) out << ',';
      out << csv::format_double(matrix.at(x, t));
    }
    out << '\n';
  }
}

inline BidPriceMatrix read_bid_matrix_csv(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.size() < 2) throw std::invalid_argument("bid matrix csv: missing header");
  csv::expect_header(records[0], {"capacity", "horizon_days", "origin"}, "bid matrix csv");
  if (records[1].size() != 3) throw std::invalid_argument("bid matrix csv: bad metadata row");
  const int capacity = csv::parse_int<int>(records[1][0]);
  const int horizon = csv::parse_int<int>(records[1][1]);
  BidPriceMatrix matrix(capacity, horizon, parse_matrix_origin(records[1][2]));
  if (records.size() != static_cast<std::size_t>(capacity) + 2)
    throw std::invalid_argument("bid matrix csv: expected " + std::to_string(capacity) + " rows");
  for (int x = 1; x <= capacity; ++x) {
    const auto& row = records[static_cast<std::size_t>(x) + 1];
    if (row.size() != static_cast<std::size_t>(horizon))
      throw std::invalid_argument("bid matrix csv: row " + std::to_string(x) + " has wrong width");
    for (int t = 0; t < horizon; ++t) matrix.at(x, t) = csv::parse_double(row[t]);
  }
  return matrix;
}

}  // namespace bidprice

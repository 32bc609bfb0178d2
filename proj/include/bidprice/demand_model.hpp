#pragma once

// Stationary Poisson arrivals with shifted-exponential willingness to pay.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bidprice/rng.hpp"

namespace bidprice {

struct DemandScenario {
  double lambda_per_day = 0.0;
  double alpha = 100.0;
  double p0 = 50.0;
  int capacity = 1;
  int horizon_days = 1;

  void validate() const {
    if (!(std::isfinite(lambda_per_day) && lambda_per_day >= 0.0))
      throw std::invalid_argument("scenario: lambda_per_day must be finite and >= 0");
    if (!(std::isfinite(alpha) && alpha > 0.0))
      throw std::invalid_argument("scenario: alpha must be finite and > 0");
    if (!(std::isfinite(p0) && p0 >= 0.0))
      throw std::invalid_argument("scenario: p0 must be finite and >= 0");
    if (capacity < 1) throw std::invalid_argument("scenario: capacity must be >= 1");
    if (horizon_days < 1) throw std::invalid_argument("scenario: horizon_days must be >= 1");
  }

  bool operator==(const DemandScenario&) const = default;
};

struct Arrival {
  double time_to_departure = 0.0;  // days, in [0, horizon)
  double wtp = 0.0;

  bool operator==(const Arrival&) const = default;
};

struct ArrivalStream {
  DemandScenario scenario;
  std::uint64_t seed = 0;
  std::vector<Arrival> arrivals;  // strictly decreasing time_to_departure

  bool operator==(const ArrivalStream&) const = default;
};

/// P(WTP >= price) for WTP = p0 + Exp(mean alpha). Prices below the floor
/// are clamped to probability one.
inline double purchase_probability(double price, double p0, double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0)
    throw std::invalid_argument("purchase_probability: alpha must be finite and > 0");
  if (!std::isfinite(price))
    throw std::invalid_argument("purchase_probability: price must be finite");
  if (price <= p0) return 1.0;
  return std::exp(-(price - p0) / alpha);
}

inline double sample_wtp(double p0, double alpha, Rng& rng) { return p0 + rng.exponential(alpha); }

/// Homogeneous Poisson arrivals over [0, horizon) walked backwards from the
/// horizon, so times come out strictly decreasing without a sort.
inline ArrivalStream sample_arrival_stream(const DemandScenario& scenario, std::uint64_t seed) {
  scenario.validate();
  ArrivalStream stream{scenario, seed, {}};
  if (scenario.lambda_per_day == 0.0) return stream;

  Rng rng(seed);
  const double mean_gap = 1.0 / scenario.lambda_per_day;
  double tau = static_cast<double>(scenario.horizon_days);
  stream.arrivals.reserve(
      static_cast<std::size_t>(scenario.lambda_per_day * scenario.horizon_days * 1.2) + 16);
  for (;;) {
    const double gap = rng.exponential(mean_gap);
    const double next = tau - gap;
    if (next < 0.0) break;
    // Zero-length gaps (possible only through rounding) would break strict
    // ordering; step to the next representable time instead.
    tau = next < tau ? next : std::nextafter(tau, 0.0);
    stream.arrivals.push_back({tau, sample_wtp(scenario.p0, scenario.alpha, rng)});
  }
  return stream;
}

}  // namespace bidprice

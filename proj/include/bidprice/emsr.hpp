#pragma once

// Single-class expected marginal seat revenue and Littlewood's rule.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bidprice/observation_builder.hpp"
#include "bidprice/rng.hpp"

namespace bidprice {

struct NormalDemandClass {
  double fare = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
};

/// P(Z > z) for a standard normal Z.
inline double normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// P(D > s); a zero standard deviation is a point mass at the mean.
inline double demand_survival(const NormalDemandClass& demand, double s) {
  if (demand.std_dev == 0.0) return demand.mean > s ? 1.0 : 0.0;
  return normal_ccdf((s - demand.mean) / demand.std_dev);
}

/// Element s - 1 is fare * P(D > s) for seat s = 1..capacity.
inline std::vector<double> emsr_curve(const NormalDemandClass& demand, int capacity) {
  if (!(demand.std_dev >= 0.0)) throw std::invalid_argument("emsr_curve: std_dev must be >= 0");
  if (capacity < 1) throw std::invalid_argument("emsr_curve: capacity must be >= 1");
  std::vector<double> curve(static_cast<std::size_t>(capacity));
  for (int s = 1; s <= capacity; ++s)
    curve[static_cast<std::size_t>(s - 1)] = demand.fare * demand_survival(demand, s);
  return curve;
}

/// Accept the lower fare iff it is at least the higher class's EMSR for the
/// marginal seat.
inline bool littlewood_accept(double lower_fare, const NormalDemandClass& demand, int remaining) {
  if (remaining < 1) throw std::invalid_argument("littlewood_accept: remaining must be >= 1");
  if (!(demand.std_dev >= 0.0)) throw std::invalid_argument("littlewood_accept: std_dev must be >= 0");
  return lower_fare >= demand.fare * demand_survival(demand, remaining);
}

/// Historical flights for the EMSR comparison: each flight books
/// floor(max(D, 0)) seats at the class fare, all on day 0.
inline std::vector<FlightBookings> sample_normal_demand_flights(const NormalDemandClass& demand,
                                                                int n_flights, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FlightBookings> flights(static_cast<std::size_t>(n_flights));
  for (int i = 0; i < n_flights; ++i) {
    auto& flight = flights[static_cast<std::size_t>(i)];
    flight.flight_id = std::to_string(i);
    const double draw = rng.normal(demand.mean, demand.std_dev);
    const auto bookings = draw > 0.0 ? static_cast<std::size_t>(std::floor(draw)) : 0;
    flight.prices.assign(bookings, demand.fare);
    flight.days.assign(bookings, 0);
  }
  return flights;
}

}  // namespace bidprice

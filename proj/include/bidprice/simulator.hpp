#pragma once

// Posted-price booking simulation under bid-price control.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bidprice/csv.hpp"
#include "bidprice/demand_model.hpp"
#include "bidprice/dp_optimal.hpp"
#include "bidprice/observation_builder.hpp"

namespace bidprice {

/// Which matrix column prices an arrival on day t.
enum class BidDayConvention {
  current_day,   // column t
  previous_day,  // column max(t - 1, 0)
};

struct PolicyHandle {
  BidPriceMatrix matrix;
  double alpha = 0.0;
  double p0 = 0.0;
  BidDayConvention convention = BidDayConvention::current_day;
};

struct FlightOutcome {
  std::vector<BookingRecord> bookings;
  double revenue = 0.0;
  double load_factor = 0.0;
  int final_remaining = 0;
  int arrivals_seen = 0;
  std::vector<int> accepted_arrivals;  // stream indices, parallel to bookings

  bool operator==(const FlightOutcome&) const = default;
};

inline FlightOutcome simulate_flight(const ArrivalStream& stream, const PolicyHandle& policy,
                                     std::string flight_id = "0") {
  const DemandScenario& scenario = stream.scenario;
  if (policy.matrix.capacity() != scenario.capacity ||
      policy.matrix.horizon_days() != scenario.horizon_days)
    throw std::invalid_argument("simulate_flight: policy matrix is " +
                                std::to_string(policy.matrix.capacity()) + "x" +
                                std::to_string(policy.matrix.horizon_days()) + ", scenario needs " +
                                std::to_string(scenario.capacity) + "x" +
                                std::to_string(scenario.horizon_days));

  FlightOutcome outcome;
  outcome.final_remaining = scenario.capacity;
  outcome.arrivals_seen = static_cast<int>(stream.arrivals.size());
  for (std::size_t index = 0; index < stream.arrivals.size(); ++index) {
    const Arrival& arrival = stream.arrivals[index];
    if (outcome.final_remaining == 0) break;
    int day = static_cast<int>(std::floor(arrival.time_to_departure));
    if (policy.convention == BidDayConvention::previous_day && day > 0) --day;
    const double bid = bid_price_lookup(policy.matrix, outcome.final_remaining, day);
    const double price = optimal_price(bid, policy.alpha, policy.p0);
    if (arrival.wtp >= price) {
      outcome.bookings.push_back({flight_id, static_cast<int>(std::floor(arrival.time_to_departure)), price});
      outcome.accepted_arrivals.push_back(static_cast<int>(index));
      outcome.revenue += price;
      --outcome.final_remaining;
    }
  }
  outcome.load_factor =
      static_cast<double>(scenario.capacity - outcome.final_remaining) / scenario.capacity;
  return outcome;
}

/// Sub-seed for flight `index` of a scenario.
inline std::uint64_t flight_seed(std::uint64_t base_seed, std::size_t index) {
  return derive_seed(base_seed, index);
}

/// Generates each flight's stream once and replays it against every policy.
/// result[p][i] is policy p's outcome on flight i.
inline std::vector<std::vector<FlightOutcome>> simulate_scenario(const DemandScenario& scenario,
                                                                 int n_flights, std::uint64_t base_seed,
                                                                 std::span<const PolicyHandle> policies) {
  if (n_flights < 1) throw std::invalid_argument("simulate_scenario: n_flights must be >= 1");
  std::vector<std::vector<FlightOutcome>> results(policies.size());
  for (auto& r : results) r.reserve(static_cast<std::size_t>(n_flights));
  for (int i = 0; i < n_flights; ++i) {
    const ArrivalStream stream = sample_arrival_stream(scenario, flight_seed(base_seed, i));
    for (std::size_t p = 0; p < policies.size(); ++p)
      results[p].push_back(simulate_flight(stream, policies[p], std::to_string(i)));
  }
  return results;
}

inline double revenue_gap(double candidate, double reference) {
  if (!(reference > 0.0)) throw std::invalid_argument("revenue_gap: reference must be > 0");
  return (candidate - reference) / reference;
}

inline double load_factor_gap(double candidate_lf, double reference_lf) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(candidate_lf) || !in_unit(reference_lf))
    throw std::invalid_argument("load_factor_gap: load factors must lie in [0, 1]");
  return candidate_lf - reference_lf;
}

struct OutcomeSummary {
  double mean_revenue = 0.0;
  double mean_load_factor = 0.0;
};

inline OutcomeSummary summarize_outcomes(std::span<const FlightOutcome> outcomes) {
  OutcomeSummary s;
  if (outcomes.empty()) return s;
  for (const auto& o : outcomes) {
    s.mean_revenue += o.revenue;
    s.mean_load_factor += o.load_factor;
  }
  s.mean_revenue /= static_cast<double>(outcomes.size());
  s.mean_load_factor /= static_cast<double>(outcomes.size());
  return s;
}

inline void write_outcomes_header(std::ostream& out) {
  out << "scenario_id,policy,flight_index,revenue,load_factor,bookings\n";
}

inline void write_outcomes_rows(std::ostream& out, int scenario_id, std::string_view policy,
                                std::span<const FlightOutcome> outcomes) {
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    out << scenario_id << ',' << policy << ',' << i << ',' << csv::format_double(outcomes[i].revenue)
        << ',' << csv::format_double(outcomes[i].load_factor) << ',' << outcomes[i].bookings.size()
        << '\n';
}

}  // namespace bidprice

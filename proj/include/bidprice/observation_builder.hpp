#pragma once

// Ex-post greedy observation building: for every data collection point
// (DCP), the prices realized from that point until departure are sorted
// descending and zero-padded to capacity. Entry k of the resulting column is
// the revenue the k-th remaining seat would have earned with hindsight, a
// proxy for the bid price at that capacity level.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bidprice/csv.hpp"

namespace bidprice {

struct BookingRecord {
  std::string flight_id;
  int days_to_departure = 0;
  double price = 0.0;

  bool operator==(const BookingRecord&) const = default;
};

/// Strictly decreasing DCP boundaries in days-to-departure.
class DcpGrid {
 public:
  DcpGrid() = default;
  explicit DcpGrid(std::vector<int> boundaries) : boundaries_(std::move(boundaries)) {
    for (std::size_t j = 0; j < boundaries_.size(); ++j) {
      if (boundaries_[j] < 0) throw std::invalid_argument("DcpGrid: boundaries must be >= 0");
      if (j > 0 && boundaries_[j] >= boundaries_[j - 1])
        throw std::invalid_argument("DcpGrid: boundaries must be strictly decreasing");
    }
  }

  std::span<const int> boundaries() const noexcept { return boundaries_; }
  std::size_t size() const noexcept { return boundaries_.size(); }
  bool empty() const noexcept { return boundaries_.empty(); }
  int operator[](std::size_t j) const { return boundaries_.at(j); }

  bool operator==(const DcpGrid&) const = default;

 private:
  std::vector<int> boundaries_;
};

/// Uniform grouping of the horizon; interval j is labelled by its largest
/// days-to-departure. Leftover days go to the earliest intervals.
inline DcpGrid build_dcp_grid(int horizon_days, int n_groups) {
  if (n_groups < 1 || n_groups > horizon_days)
    throw std::invalid_argument("build_dcp_grid: need 1 <= n_groups <= horizon_days");
  const int width = horizon_days / n_groups;
  const int remainder = horizon_days % n_groups;
  std::vector<int> boundaries;
  boundaries.reserve(static_cast<std::size_t>(n_groups));
  int top = horizon_days - 1;
  for (int j = 0; j < n_groups; ++j) {
    boundaries.push_back(top);
    top -= width + (j < remainder ? 1 : 0);
  }
  return DcpGrid(std::move(boundaries));
}

/// Dense C x |D| matrix of bid-price proxies for one flight, column-major by DCP.
class ProxyMatrix {
 public:
  ProxyMatrix(int capacity, std::size_t n_dcps)
      : capacity_(capacity), n_dcps_(n_dcps), values_(static_cast<std::size_t>(capacity) * n_dcps) {}

  int capacity() const noexcept { return capacity_; }
  std::size_t n_dcps() const noexcept { return n_dcps_; }

  /// capacity index k in 1..C, DCP position j in 0..|D|-1.
  double& at(int k, std::size_t j) { return values_[index(k, j)]; }
  double at(int k, std::size_t j) const { return values_[index(k, j)]; }

  std::span<const double> column(std::size_t j) const {
    return std::span<const double>(values_).subspan(j * capacity_, capacity_);
  }

  bool operator==(const ProxyMatrix&) const = default;

 private:
  std::size_t index(int k, std::size_t j) const {
    if (k < 1 || k > capacity_ || j >= n_dcps_) throw std::out_of_range("ProxyMatrix: bad index");
    return j * capacity_ + static_cast<std::size_t>(k - 1);
  }

  int capacity_;
  std::size_t n_dcps_;
  std::vector<double> values_;
};

/// Column j holds the largest min(C, m) prices booked at or after DCP d_j.
/// Bookings earlier than d_1 count toward the first column.
inline ProxyMatrix transform_flight(std::span<const double> prices, std::span<const int> days,
                                    int capacity, const DcpGrid& grid) {
  if (prices.size() != days.size())
    throw std::invalid_argument("transform_flight: prices and days differ in length");
  if (capacity < 1) throw std::invalid_argument("transform_flight: capacity must be >= 1");

  ProxyMatrix out(capacity, grid.size());
  std::vector<double> subset;
  subset.reserve(prices.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    subset.clear();
    for (std::size_t n = 0; n < prices.size(); ++n) {
      if (j == 0 || days[n] <= grid[j]) subset.push_back(prices[n]);
    }
    const auto keep = std::min(subset.size(), static_cast<std::size_t>(capacity));
    std::partial_sort(subset.begin(), subset.begin() + static_cast<std::ptrdiff_t>(keep),
                      subset.end(), std::greater<>());
    for (std::size_t k = 0; k < keep; ++k) out.at(static_cast<int>(k) + 1, j) = subset[k];
  }
  return out;
}

struct FlightBookings {
  std::string flight_id;
  std::vector<double> prices;
  std::vector<int> days;

  bool operator==(const FlightBookings&) const = default;
};

struct Observation {
  std::string flight_id;
  int dcp = 0;             // boundary value d_j in days-to-departure
  int capacity_index = 0;  // 1..C
  double target = 0.0;

  bool operator==(const Observation&) const = default;
};

struct ObservationSet {
  int capacity = 0;
  std::vector<Observation> rows;

  bool empty() const noexcept { return rows.empty(); }
  std::size_t size() const noexcept { return rows.size(); }
  bool operator==(const ObservationSet&) const = default;
};

/// Rows ordered by flight, then DCP in grid order, then capacity index.
inline ObservationSet assemble_training_set(std::span<const FlightBookings> flights, int capacity,
                                            const DcpGrid& grid) {
  ObservationSet set{capacity, {}};
  set.rows.reserve(flights.size() * grid.size() * static_cast<std::size_t>(capacity));
  for (const auto& flight : flights) {
    const ProxyMatrix proxy = transform_flight(flight.prices, flight.days, capacity, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      for (int k = 1; k <= capacity; ++k)
        set.rows.push_back({flight.flight_id, grid[j], k, proxy.at(k, j)});
    }
  }
  return set;
}

/// Groups records by flight id in order of first appearance.
inline std::vector<FlightBookings> group_by_flight(std::span<const BookingRecord> records) {
  std::vector<FlightBookings> flights;
  std::unordered_map<std::string, std::size_t> position;
  for (const auto& record : records) {
    auto [it, inserted] = position.try_emplace(record.flight_id, flights.size());
    if (inserted) flights.push_back({record.flight_id, {}, {}});
    auto& flight = flights[it->second];
    flight.prices.push_back(record.price);
    flight.days.push_back(record.days_to_departure);
  }
  return flights;
}

/// Header `flight_id,days_to_departure,price[,quantity]`. A quantity q expands
/// into q identical unit bookings.
inline std::vector<BookingRecord> read_bookings_csv(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw std::invalid_argument("bookings csv: missing header");
  const auto& header = records.front();
  const bool has_quantity = header.size() == 4;
  if (has_quantity)
    csv::expect_header(header, {"flight_id", "days_to_departure", "price", "quantity"},
                       "bookings csv");
  else
    csv::expect_header(header, {"flight_id", "days_to_departure", "price"}, "bookings csv");

  std::vector<BookingRecord> bookings;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& row = records[i];
    const auto where = " (line " + std::to_string(i + 1) + ")";
    if (row.size() != header.size()) throw std::invalid_argument("bookings csv: bad width" + where);
    BookingRecord record{row[0], csv::parse_int<int>(row[1]), csv::parse_double(row[2])};
    if (record.flight_id.empty()) throw std::invalid_argument("bookings csv: empty flight_id" + where);
    if (record.days_to_departure < 0)
      throw std::invalid_argument("bookings csv: negative days_to_departure" + where);
    if (!(std::isfinite(record.price) && record.price >= 0.0))
      throw std::invalid_argument("bookings csv: price must be >= 0" + where);
    const long quantity = has_quantity ? csv::parse_int<long>(row[3]) : 1;
    if (quantity < 0) throw std::invalid_argument("bookings csv: negative quantity" + where);
    for (long q = 0; q < quantity; ++q) bookings.push_back(record);
  }
  return bookings;
}

inline void write_bookings_csv(std::ostream& out, std::span<const BookingRecord> bookings) {
  out << "flight_id,days_to_departure,price\n";
  for (const auto& b : bookings)
    out << b.flight_id << ',' << b.days_to_departure << ',' << csv::format_double(b.price) << '\n';
}

inline void write_observations_csv(std::ostream& out, const ObservationSet& set) {
  out << "flight_id,dcp,capacity_index,target\n";
  for (const auto& row : set.rows)
    out << row.flight_id << ',' << row.dcp << ',' << row.capacity_index << ','
        << csv::format_double(row.target) << '\n';
}

/// Capacity is taken as the largest capacity index present.
inline ObservationSet read_observations_csv(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw std::invalid_argument("observations csv: missing header");
  csv::expect_header(records.front(), {"flight_id", "dcp", "capacity_index", "target"},
                     "observations csv");
  ObservationSet set;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& row = records[i];
    if (row.size() != 4)
      throw std::invalid_argument("observations csv: bad width (line " + std::to_string(i + 1) + ")");
    Observation obs{row[0], csv::parse_int<int>(row[1]), csv::parse_int<int>(row[2]),
                    csv::parse_double(row[3])};
    if (obs.capacity_index < 1 || !(obs.target >= 0.0))
      throw std::invalid_argument("observations csv: invalid row (line " + std::to_string(i + 1) + ")");
    set.capacity = std::max(set.capacity, obs.capacity_index);
    set.rows.push_back(std::move(obs));
  }
  return set;
}

}  // namespace bidprice

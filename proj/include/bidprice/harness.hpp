#pragma once

// Baseline and demand-misspecification experiments.
//
// Baseline, per scenario: draw lambda, solve the DP, simulate the optimal
// policy to produce booking history, build observations, fit the estimator,
// expand to a daily matrix and replay the same arrival streams under the
// data-driven policy.
//
// Robustness, per scenario: train on lambda_train history, then replay one
// set of lambda_test streams under the data-driven policy, the DP solved for
// lambda_train (misspecified) and the DP solved for lambda_test (optimal).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bidprice/csv.hpp"
#include "bidprice/demand_model.hpp"
#include "bidprice/dp_optimal.hpp"
#include "bidprice/estimator.hpp"
#include "bidprice/observation_builder.hpp"
#include "bidprice/rng.hpp"
#include "bidprice/simulator.hpp"

namespace bidprice {

struct Range {
  double low = 0.0;
  double high = 0.0;

  bool contains(double v) const noexcept { return v >= low && v <= high; }
  bool operator==(const Range&) const = default;
};

/// Fields shared by both experiment types.
struct ExperimentSettings {
  int n_scenarios = 20;
  int n_flights = 100;
  int capacity = 50;
  int horizon_days = 100;
  int n_dcps = 10;
  double alpha = 100.0;
  double p0 = 50.0;
  double dt = kDefaultDt;
  EstimatorConfig estimator;
  std::uint64_t master_seed = 20240601;
  int workers = 1;

  void validate_common() const {
    if (n_scenarios < 1 || n_flights < 1) throw std::invalid_argument("config: counts must be >= 1");
    if (capacity < 1 || horizon_days < 1) throw std::invalid_argument("config: capacity/horizon must be >= 1");
    if (n_dcps < 1 || n_dcps > horizon_days)
      throw std::invalid_argument("config: n_dcps must be in [1, horizon_days]");
    if (!(alpha > 0.0) || !(p0 >= 0.0)) throw std::invalid_argument("config: need alpha > 0, p0 >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    estimator.validate();
  }
};

inline void validate_range(const Range& r, const char* name, bool positive) {
  if (!(std::isfinite(r.low) && std::isfinite(r.high) && r.low <= r.high))
    throw std::invalid_argument(std::string("config: ") + name + " must satisfy low <= high");
  if (positive ? !(r.low > 0.0) : !(r.low >= 0.0))
    throw std::invalid_argument(std::string("config: ") + name + " must be " +
                                (positive ? "positive" : "nonnegative"));
}

struct BaselineConfig : ExperimentSettings {
  Range lambda_range{2.4, 3.6};

  void validate() const {
    validate_common();
    validate_range(lambda_range, "lambda_range", false);
  }

  static BaselineConfig desk_scale() { return {}; }

  static BaselineConfig paper_scale() {
    BaselineConfig c;
    c.n_scenarios = 100;
    c.n_flights = 300;
    c.capacity = 100;
    c.horizon_days = 300;
    return c;
  }
};

struct RobustnessConfig : ExperimentSettings {
  Range lambda_train_range{2.4, 3.6};
  Range lambda_test_range{1.2, 5.4};
  /// lambda_test is redrawn until lambda_test / lambda_train falls here.
  Range ratio_range{0.5, 1.5};

  RobustnessConfig() { n_scenarios = 50; }

  void validate() const {
    validate_common();
    validate_range(lambda_train_range, "lambda_train_range", true);
    validate_range(lambda_test_range, "lambda_test_range", true);
    validate_range(ratio_range, "ratio_range", true);
    if (lambda_test_range.high / lambda_train_range.low < ratio_range.low ||
        lambda_test_range.low / lambda_train_range.high > ratio_range.high)
      throw std::invalid_argument("config: lambda ranges cannot produce a ratio inside ratio_range");
  }

  static RobustnessConfig desk_scale() { return {}; }

  static RobustnessConfig paper_scale() {
    RobustnessConfig c;
    c.n_scenarios = 500;
    c.n_flights = 500;
    c.capacity = 100;
    c.horizon_days = 300;
    return c;
  }
};

enum class PolicyKind { optimal, data_driven, misspecified_dp };

inline const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::optimal: return "optimal";
    case PolicyKind::data_driven: return "data_driven";
    case PolicyKind::misspecified_dp: return "misspecified_dp";
  }
  return "?";
}

inline PolicyKind parse_policy_kind(std::string_view text) {
  if (text == "optimal") return PolicyKind::optimal;
  if (text == "data_driven") return PolicyKind::data_driven;
  if (text == "misspecified_dp") return PolicyKind::misspecified_dp;
  throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
}

struct ExperimentResult {
  int scenario_id = 0;
  double lambda_train = 0.0;
  double lambda_test = 0.0;
  PolicyKind policy = PolicyKind::optimal;
  double mean_revenue = 0.0;
  double mean_load_factor = 0.0;
  double revenue_gap_vs_optimal = 0.0;
  double load_factor_gap_vs_optimal = 0.0;

  bool operator==(const ExperimentResult&) const = default;
};

struct ScenarioFailure {
  int scenario_id = 0;
  std::string message;
};

struct ExperimentRun {
  std::vector<ExperimentResult> results;  // sorted by (scenario_id, policy)
  std::vector<ScenarioFailure> failures;  // sorted by scenario_id
  std::string outcomes_csv;               // per-flight outcomes, all scenarios
};

/// Optional per-scenario artifact files; written by worker threads, one
/// distinct file per scenario and policy.
struct ArtifactOptions {
  std::optional<std::filesystem::path> out_dir;
};

namespace detail {

struct ScenarioOutput {
  std::vector<ExperimentResult> results;
  std::string outcomes_csv;
  std::optional<std::string> error;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = csv::open_output(path.string());
  out << text;
}

inline void write_matrix_file(const ArtifactOptions& artifacts, int scenario_id, PolicyKind policy,
                              const BidPriceMatrix& matrix) {
  if (!artifacts.out_dir) return;
  std::ostringstream text;
  write_bid_matrix_csv(text, matrix);
  write_text_file(*artifacts.out_dir / ("bidprices_" + std::to_string(scenario_id) + "_" +
                                        to_string(policy) + ".csv"),
                  text.str());
}

inline std::vector<FlightBookings> booking_history(std::span<const FlightOutcome> outcomes) {
  std::vector<FlightBookings> flights;
  flights.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    FlightBookings f{std::to_string(i), {}, {}};
    for (const auto& b : outcomes[i].bookings) {
      f.prices.push_back(b.price);
      f.days.push_back(b.days_to_departure);
    }
    flights.push_back(std::move(f));
  }
  return flights;
}

/// Fits the configured estimator on optimal-policy history and returns the
/// daily data-driven matrix.
inline BidPriceMatrix train_data_driven(const ExperimentSettings& settings, int scenario_id,
                                        std::uint64_t scenario_seed,
                                        std::span<const FlightOutcome> history,
                                        const ArtifactOptions& artifacts) {
  const DcpGrid grid = build_dcp_grid(settings.horizon_days, settings.n_dcps);
  const ObservationSet observations =
      assemble_training_set(booking_history(history), settings.capacity, grid);
  if (artifacts.out_dir) {
    std::ostringstream text;
    write_observations_csv(text, observations);
    write_text_file(*artifacts.out_dir / ("observations_" + std::to_string(scenario_id) + ".csv"),
                    text.str());
  }
  EstimatorConfig estimator = settings.estimator;
  estimator.seed = derive_seed(derive_seed(scenario_seed, 2), settings.estimator.seed);
  const FittedEstimator model = fit_estimator(observations, estimator);
  return expand_to_daily(model, settings.capacity, settings.horizon_days, grid);
}

inline std::vector<ExperimentResult> score(int scenario_id, double lambda_train, double lambda_test,
                                           std::span<const PolicyKind> kinds,
                                           const std::vector<std::vector<FlightOutcome>>& outcomes) {
  // kinds[0] must be the optimal policy.
  const OutcomeSummary reference = summarize_outcomes(outcomes[0]);
  std::vector<ExperimentResult> rows;
  for (std::size_t p = 0; p < kinds.size(); ++p) {
    const OutcomeSummary s = summarize_outcomes(outcomes[p]);
    ExperimentResult r{scenario_id, lambda_train, lambda_test, kinds[p], s.mean_revenue,
                       s.mean_load_factor, 0.0, 0.0};
    if (p > 0) {
      r.revenue_gap_vs_optimal =
          reference.mean_revenue > 0.0 ? revenue_gap(s.mean_revenue, reference.mean_revenue) : 0.0;
      r.load_factor_gap_vs_optimal = load_factor_gap(s.mean_load_factor, reference.mean_load_factor);
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::string outcomes_text(int scenario_id, std::span<const PolicyKind> kinds,
                                 const std::vector<std::vector<FlightOutcome>>& outcomes) {
  std::ostringstream text;
  for (std::size_t p = 0; p < kinds.size(); ++p)
    write_outcomes_rows(text, scenario_id, to_string(kinds[p]), outcomes[p]);
  return text.str();
}

inline ScenarioOutput run_baseline_scenario(const BaselineConfig& config, int scenario_id,
                                            const ArtifactOptions& artifacts) {
  ScenarioOutput output;
  try {
    const std::uint64_t scenario_seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(scenario_id));
    Rng draw(derive_seed(scenario_seed, 0));
    const double lambda = draw.uniform(config.lambda_range.low, config.lambda_range.high);
    const DemandScenario scenario{lambda, config.alpha, config.p0, config.capacity, config.horizon_days};
    const std::uint64_t stream_seed = derive_seed(scenario_seed, 1);

    const BidPriceMatrix optimal = compute_value_and_bid(scenario, config.dt).bids;
    write_matrix_file(artifacts, scenario_id, PolicyKind::optimal, optimal);
    const PolicyHandle optimal_policy{optimal, config.alpha, config.p0};
    const auto history = simulate_scenario(scenario, config.n_flights, stream_seed,
                                           std::span(&optimal_policy, 1));

    const BidPriceMatrix data_driven =
        train_data_driven(config, scenario_id, scenario_seed, history[0], artifacts);
    write_matrix_file(artifacts, scenario_id, PolicyKind::data_driven, data_driven);
    const PolicyHandle policies[] = {optimal_policy, {data_driven, config.alpha, config.p0}};
    const PolicyKind kinds[] = {PolicyKind::optimal, PolicyKind::data_driven};
    const auto outcomes = simulate_scenario(scenario, config.n_flights, stream_seed, policies);
    output.results = score(scenario_id, lambda, lambda, kinds, outcomes);
    output.outcomes_csv = outcomes_text(scenario_id, kinds, outcomes);
  } catch (const std::exception& e) {
    output.error = e.what();
  }
  return output;
}

inline std::pair<double, double> draw_lambda_pair(const RobustnessConfig& config, Rng& rng) {
  const double lambda_train = rng.uniform(config.lambda_train_range.low, config.lambda_train_range.high);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double lambda_test = rng.uniform(config.lambda_test_range.low, config.lambda_test_range.high);
    if (config.ratio_range.contains(lambda_test / lambda_train)) return {lambda_train, lambda_test};
  }
  throw std::runtime_error("could not draw lambda_test inside ratio_range");
}

inline ScenarioOutput run_robustness_scenario(const RobustnessConfig& config, int scenario_id,
                                              const ArtifactOptions& artifacts) {
  ScenarioOutput output;
  try {
    const std::uint64_t scenario_seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(scenario_id));
    Rng draw(derive_seed(scenario_seed, 0));
    const auto [lambda_train, lambda_test] = draw_lambda_pair(config, draw);
    const DemandScenario train{lambda_train, config.alpha, config.p0, config.capacity, config.horizon_days};
    const DemandScenario test{lambda_test, config.alpha, config.p0, config.capacity, config.horizon_days};

    const BidPriceMatrix misspecified = compute_value_and_bid(train, config.dt).bids;
    const BidPriceMatrix optimal = compute_value_and_bid(test, config.dt).bids;
    const PolicyHandle train_policy{misspecified, config.alpha, config.p0};
    const auto history = simulate_scenario(train, config.n_flights, derive_seed(scenario_seed, 1),
                                           std::span(&train_policy, 1));
    const BidPriceMatrix data_driven =
        train_data_driven(config, scenario_id, scenario_seed, history[0], artifacts);

    write_matrix_file(artifacts, scenario_id, PolicyKind::optimal, optimal);
    write_matrix_file(artifacts, scenario_id, PolicyKind::data_driven, data_driven);
    write_matrix_file(artifacts, scenario_id, PolicyKind::misspecified_dp, misspecified);

    const PolicyHandle policies[] = {{optimal, config.alpha, config.p0},
                                     {data_driven, config.alpha, config.p0},
                                     train_policy};
    const PolicyKind kinds[] = {PolicyKind::optimal, PolicyKind::data_driven, PolicyKind::misspecified_dp};
    const auto outcomes =
        simulate_scenario(test, config.n_flights, derive_seed(scenario_seed, 3), policies);
    output.results = score(scenario_id, lambda_train, lambda_test, kinds, outcomes);
    output.outcomes_csv = outcomes_text(scenario_id, kinds, outcomes);
  } catch (const std::exception& e) {
    output.error = e.what();
  }
  return output;
}

/// Runs task(i) for i in [0, n) on a bounded pool; results land by index.
template <typename Task>
auto run_indexed(int n, int workers, Task task) {
  using Output = decltype(task(0));
  std::vector<Output> outputs(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next++; i < n; i = next++) outputs[static_cast<std::size_t>(i)] = task(i);
  };
  const int threads = std::min(workers, n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return outputs;
}

inline ExperimentRun collect(std::vector<ScenarioOutput> outputs) {
  ExperimentRun run;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    auto& o = outputs[i];
    if (o.error) {
      run.failures.push_back({static_cast<int>(i), *o.error});
      continue;
    }
    run.results.insert(run.results.end(), o.results.begin(), o.results.end());
    run.outcomes_csv += o.outcomes_csv;
  }
  return run;
}

}  // namespace detail

inline ExperimentRun run_baseline(const BaselineConfig& config, const ArtifactOptions& artifacts = {}) {
  config.validate();
  return detail::collect(detail::run_indexed(config.n_scenarios, config.workers, [&](int id) {
    return detail::run_baseline_scenario(config, id, artifacts);
  }));
}

inline ExperimentRun run_robustness(const RobustnessConfig& config, const ArtifactOptions& artifacts = {}) {
  config.validate();
  return detail::collect(detail::run_indexed(config.n_scenarios, config.workers, [&](int id) {
    return detail::run_robustness_scenario(config, id, artifacts);
  }));
}

// ---------------------------------------------------------------------------
// Aggregation

enum class GroupBy { lambda, ratio };

inline GroupBy parse_group_by(std::string_view text) {
  if (text == "lambda") return GroupBy::lambda;
  if (text == "ratio") return GroupBy::ratio;
  throw std::invalid_argument("group_by must be 'lambda' or 'ratio'");
}

/// Rounds to the first decimal; returned in tenths (1.04 -> 10).
inline long bucket_tenths(double value) { return std::lround(value * 10.0); }

struct SummaryRow {
  long bucket_tenths = 0;
  PolicyKind policy = PolicyKind::optimal;
  int count = 0;
  double mean_revenue = 0.0;
  double mean_load_factor = 0.0;
  double mean_revenue_gap = 0.0;
  double min_revenue_gap = 0.0;
  double max_revenue_gap = 0.0;
  double mean_load_factor_gap = 0.0;
  double min_load_factor_gap = 0.0;
  double max_load_factor_gap = 0.0;
  // Data-driven over misspecified-DP totals in the same bucket (ratio grouping only).
  std::optional<double> revenue_ratio_vs_misspecified;
  std::optional<double> load_factor_ratio_vs_misspecified;

  double bucket() const { return static_cast<double>(bucket_tenths) / 10.0; }
};

inline std::vector<SummaryRow> summarize(std::span<const ExperimentResult> results, GroupBy group_by) {
  if (results.empty()) throw std::invalid_argument("summarize: no results");
  std::map<std::pair<long, PolicyKind>, std::vector<const ExperimentResult*>> groups;
  for (const auto& r : results) {
    const double key = group_by == GroupBy::lambda ? r.lambda_test : r.lambda_test / r.lambda_train;
    groups[{bucket_tenths(key), r.policy}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.bucket_tenths = key.first;
    row.policy = key.second;
    row.count = static_cast<int>(members.size());
    row.min_revenue_gap = row.min_load_factor_gap = std::numeric_limits<double>::infinity();
    row.max_revenue_gap = row.max_load_factor_gap = -std::numeric_limits<double>::infinity();
    for (const auto* r : members) {
      row.mean_revenue += r->mean_revenue;
      row.mean_load_factor += r->mean_load_factor;
      row.mean_revenue_gap += r->revenue_gap_vs_optimal;
      row.mean_load_factor_gap += r->load_factor_gap_vs_optimal;
      row.min_revenue_gap = std::min(row.min_revenue_gap, r->revenue_gap_vs_optimal);
      row.max_revenue_gap = std::max(row.max_revenue_gap, r->revenue_gap_vs_optimal);
      row.min_load_factor_gap = std::min(row.min_load_factor_gap, r->load_factor_gap_vs_optimal);
      row.max_load_factor_gap = std::max(row.max_load_factor_gap, r->load_factor_gap_vs_optimal);
    }
    const double n = row.count;
    row.mean_revenue /= n;
    row.mean_load_factor /= n;
    row.mean_revenue_gap /= n;
    row.mean_load_factor_gap /= n;
    rows.push_back(row);
  }
  if (group_by == GroupBy::ratio) {
    for (auto& row : rows) {
      if (row.policy != PolicyKind::data_driven) continue;
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& other) {
        return other.bucket_tenths == row.bucket_tenths && other.policy == PolicyKind::misspecified_dp;
      });
      if (it == rows.end()) continue;
      if (it->mean_revenue > 0.0) row.revenue_ratio_vs_misspecified = row.mean_revenue / it->mean_revenue;
      if (it->mean_load_factor > 0.0)
        row.load_factor_ratio_vs_misspecified = row.mean_load_factor / it->mean_load_factor;
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline const std::vector<std::string>& results_header() {
  static const std::vector<std::string> header{
      "scenario_id",  "lambda_train",     "lambda_test",           "policy",
      "mean_revenue", "mean_load_factor", "revenue_gap_vs_optimal", "load_factor_gap_vs_optimal"};
  return header;
}

inline void write_results_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  const auto& header = results_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : results)
    out << r.scenario_id << ',' << csv::format_double(r.lambda_train) << ','
        << csv::format_double(r.lambda_test) << ',' << to_string(r.policy) << ','
        << csv::format_double(r.mean_revenue) << ',' << csv::format_double(r.mean_load_factor) << ','
        << csv::format_double(r.revenue_gap_vs_optimal) << ','
        << csv::format_double(r.load_factor_gap_vs_optimal) << '\n';
}

inline std::vector<ExperimentResult> read_results_csv(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw std::invalid_argument("results csv: missing header");
  csv::expect_header(records.front(), results_header(), "results csv");
  std::vector<ExperimentResult> results;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& row = records[i];
    if (row.size() != results_header().size())
      throw std::invalid_argument("results csv: bad width (line " + std::to_string(i + 1) + ")");
    results.push_back({csv::parse_int<int>(row[0]), csv::parse_double(row[1]), csv::parse_double(row[2]),
                       parse_policy_kind(row[3]), csv::parse_double(row[4]), csv::parse_double(row[5]),
                       csv::parse_double(row[6]), csv::parse_double(row[7])});
  }
  return results;
}

inline void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows, GroupBy group_by) {
  out << "group_by,bucket,policy,count,mean_revenue,mean_load_factor,mean_revenue_gap,"
         "min_revenue_gap,max_revenue_gap,mean_load_factor_gap,min_load_factor_gap,"
         "max_load_factor_gap,revenue_ratio_vs_misspecified,load_factor_ratio_vs_misspecified\n";
  const auto optional = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };
  for (const auto& r : rows) {
    const long whole = r.bucket_tenths / 10;
    const long tenth = std::labs(r.bucket_tenths % 10);
    out << (group_by == GroupBy::lambda ? "lambda" : "ratio") << ','
        << (r.bucket_tenths < 0 && whole == 0 ? "-" : "") << whole << '.' << tenth << ','
        << to_string(r.policy) << ',' << r.count << ',' << csv::format_double(r.mean_revenue) << ','
        << csv::format_double(r.mean_load_factor) << ',' << csv::format_double(r.mean_revenue_gap)
        << ',' << csv::format_double(r.min_revenue_gap) << ','
        << csv::format_double(r.max_revenue_gap) << ','
        << csv::format_double(r.mean_load_factor_gap) << ','
        << csv::format_double(r.min_load_factor_gap) << ','
        << csv::format_double(r.max_load_factor_gap) << ','
        << optional(r.revenue_ratio_vs_misspecified) << ','
        << optional(r.load_factor_ratio_vs_misspecified) << '\n';
  }
}

inline void write_failures_csv(std::ostream& out, std::span<const ScenarioFailure> failures) {
  out << "scenario_id,error\n";
  for (const auto& f : failures) {
    std::string message = f.message;
    std::replace(message.begin(), message.end(), ',', ';');
    std::replace(message.begin(), message.end(), '\n', ' ');
    out << f.scenario_id << ',' << message << '\n';
  }
}

}  // namespace bidprice

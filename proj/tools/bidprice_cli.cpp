// bidprice: command-line front end for the bid-price toolkit.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bidprice/bidprice.hpp"

namespace fs = std::filesystem;
using namespace bidprice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFailedScenarios = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool paper_scale = false;
  std::optional<int> workers;
};

KeyValues load_key_values(const CommonOptions& common) {
  if (common.config_path.empty()) return {};
  auto in = csv::open_input(common.config_path);
  return parse_key_values(in);
}

template <typename Config>
Config resolve_config(const CommonOptions& common) {
  Config config = common.paper_scale ? Config::paper_scale() : Config::desk_scale();
  apply_config(load_key_values(common), config);
  if (common.seed) config.master_seed = *common.seed;
  if (common.workers) config.workers = *common.workers;
  config.validate();
  return config;
}

fs::path prepare_out_dir(const CommonOptions& common) {
  fs::path dir(common.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  auto out = csv::open_output(path.string());
  out << text;
}

template <typename Config, typename Runner>
int run_experiment(const CommonOptions& common, GroupBy group_by, Runner runner) {
  const Config config = resolve_config<Config>(common);
  const fs::path dir = prepare_out_dir(common);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentRun run = runner(config, ArtifactOptions{dir});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream results;
  write_results_csv(results, run.results);
  write_file(dir / "results.csv", results.str());

  std::ostringstream outcomes;
  write_outcomes_header(outcomes);
  outcomes << run.outcomes_csv;
  write_file(dir / "outcomes.csv", outcomes.str());

  if (!run.results.empty()) {
    std::ostringstream summary;
    write_summary_csv(summary, summarize(run.results, group_by), group_by);
    write_file(dir / "summary.csv", summary.str());
  }

  std::ostringstream failures;
  write_failures_csv(failures, run.failures);
  write_file(dir / "failed_scenarios.csv", failures.str());

  const int completed = config.n_scenarios - static_cast<int>(run.failures.size());
  std::cout << completed << "/" << config.n_scenarios << " scenarios completed in " << seconds
            << " s; outputs in " << dir.string() << "\n";
  for (const auto& f : run.failures)
    std::cerr << "scenario " << f.scenario_id << " failed: " << f.message << "\n";
  return run.failures.empty() ? kExitOk : kExitFailedScenarios;
}

DcpGrid grid_from_observations(const ObservationSet& observations) {
  std::set<int, std::greater<>> days;
  for (const auto& row : observations.rows) days.insert(row.dcp);
  return DcpGrid(std::vector<int>(days.begin(), days.end()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven and dynamic-programming bid prices for single-leg revenue management"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  app.add_option("--config", common.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "master seed (estimator seed for `train`)");
  app.add_option("--out-dir", common.out_dir, "output directory")->capture_default_str();
  app.add_flag("--paper-scale", common.paper_scale, "start from the full-scale preset");
  app.add_option("--workers", common.workers, "scenario worker threads")->check(CLI::PositiveNumber);

  auto* baseline = app.add_subcommand("simulate-baseline", "optimal vs data-driven bid prices");
  auto* robustness = app.add_subcommand("simulate-robustness", "bid prices under demand misspecification");

  std::string bookings_path;
  std::optional<int> capacity, horizon, n_dcps;
  std::vector<int> dcp_grid;
  auto* build = app.add_subcommand("build-observations", "bookings CSV -> observations CSV");
  build->add_option("bookings", bookings_path, "bookings CSV")->required()->check(CLI::ExistingFile);
  build->add_option("--capacity", capacity, "seat capacity");
  build->add_option("--horizon", horizon, "booking horizon in days");
  build->add_option("--dcps", n_dcps, "number of uniform DCP groups");
  build->add_option("--dcp-grid", dcp_grid, "explicit DCP boundaries, strictly decreasing")->delimiter(',');

  std::string observations_path;
  std::string estimator_kind;
  auto* train = app.add_subcommand("train", "fit an estimator on observations");
  train->add_option("observations", observations_path, "observations CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--estimator", estimator_kind, "neural | simple_average");
  train->add_option("--horizon", horizon, "also write the daily bid-price matrix for this horizon");

  double lambda = 0.0;
  std::optional<double> alpha, p0, dt;
  auto* dp = app.add_subcommand("dp-solve", "exact DP bid prices for one scenario");
  dp->add_option("--lambda", lambda, "arrivals per day")->required();
  dp->add_option("--alpha", alpha, "mean WTP increment");
  dp->add_option("--p0", p0, "WTP floor");
  dp->add_option("--capacity", capacity, "seat capacity");
  dp->add_option("--horizon", horizon, "booking horizon in days");
  dp->add_option("--dt", dt, "DP time step in days");

  NormalDemandClass demand{400.0, 3.0, 2.0};
  int emsr_capacity = 10;
  auto* emsr = app.add_subcommand("emsr-curve", "fare * P(D > s) for normal demand");
  emsr->add_option("--fare", demand.fare)->capture_default_str();
  emsr->add_option("--mean", demand.mean)->capture_default_str();
  emsr->add_option("--std-dev", demand.std_dev)->capture_default_str();
  emsr->add_option("--capacity", emsr_capacity)->capture_default_str();

  std::string results_path;
  std::string group_by = "lambda";
  auto* summarize_cmd = app.add_subcommand("summarize", "aggregate a results CSV");
  summarize_cmd->add_option("results", results_path, "results CSV")->required()->check(CLI::ExistingFile);
  summarize_cmd->add_option("--group-by", group_by, "lambda | ratio")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (baseline->parsed())
      return run_experiment<BaselineConfig>(common, GroupBy::lambda, [](const auto& c, const auto& a) {
        return run_baseline(c, a);
      });
    if (robustness->parsed())
      return run_experiment<RobustnessConfig>(common, GroupBy::ratio, [](const auto& c, const auto& a) {
        return run_robustness(c, a);
      });

    // Single-shot commands: scenario-shaped defaults come from the presets,
    // then the config file, then explicit flags.
    BaselineConfig settings = resolve_config<BaselineConfig>(common);
    if (capacity) settings.capacity = *capacity;
    if (horizon) settings.horizon_days = *horizon;
    if (n_dcps) settings.n_dcps = *n_dcps;
    if (alpha) settings.alpha = *alpha;
    if (p0) settings.p0 = *p0;
    if (dt) settings.dt = *dt;
    const fs::path dir = prepare_out_dir(common);

    if (build->parsed()) {
      auto in = csv::open_input(bookings_path);
      const auto flights = group_by_flight(read_bookings_csv(in));
      const DcpGrid grid = dcp_grid.empty() ? build_dcp_grid(settings.horizon_days, settings.n_dcps)
                                            : DcpGrid(dcp_grid);
      const ObservationSet set = assemble_training_set(flights, settings.capacity, grid);
      std::ostringstream text;
      write_observations_csv(text, set);
      write_file(dir / "observations.csv", text.str());
      std::cout << flights.size() << " flights, " << set.size() << " observations -> "
                << (dir / "observations.csv").string() << "\n";
      return kExitOk;
    }

    if (train->parsed()) {
      auto in = csv::open_input(observations_path);
      const ObservationSet set = read_observations_csv(in);
      EstimatorConfig config = settings.estimator;
      if (!estimator_kind.empty()) config.kind = parse_estimator_kind(estimator_kind);
      if (common.seed) config.seed = *common.seed;
      const FittedEstimator model = fit_estimator(set, config);
      {
        auto out = csv::open_output((dir / "model.json").string());
        save_model(out, model);
      }
      std::cout << to_string(model.kind()) << " estimator";
      if (const auto* m = model.neural())
        std::cout << " trained for " << m->epochs_trained << " epochs (best monitored mse "
                  << m->best_monitor_loss << ")";
      std::cout << " -> " << (dir / "model.json").string() << "\n";
      if (horizon) {
        const BidPriceMatrix matrix =
            expand_to_daily(model, set.capacity, *horizon, grid_from_observations(set));
        std::ostringstream text;
        write_bid_matrix_csv(text, matrix);
        write_file(dir / "bidprices_data_driven.csv", text.str());
      }
      return kExitOk;
    }

    if (dp->parsed()) {
      const DemandScenario scenario{lambda, settings.alpha, settings.p0, settings.capacity,
                                    settings.horizon_days};
      const DpSolution solution = compute_value_and_bid(scenario, settings.dt);
      std::ostringstream text;
      write_bid_matrix_csv(text, solution.bids);
      write_file(dir / "bidprices_dp_optimal.csv", text.str());
      std::cout << "V(C, T) = " << solution.value.at(settings.capacity, solution.value.steps())
                << " -> " << (dir / "bidprices_dp_optimal.csv").string() << "\n";
      return kExitOk;
    }

    if (emsr->parsed()) {
      const auto curve = emsr_curve(demand, emsr_capacity);
      std::ostringstream text;
      text << "seat,emsr\n";
      for (std::size_t s = 0; s < curve.size(); ++s) text << s + 1 << ',' << csv::format_double(curve[s]) << '\n';
      write_file(dir / "emsr_curve.csv", text.str());
      std::cout << text.str();
      return kExitOk;
    }

    if (summarize_cmd->parsed()) {
      auto in = csv::open_input(results_path);
      const auto results = read_results_csv(in);
      const GroupBy grouping = parse_group_by(group_by);
      std::ostringstream text;
      write_summary_csv(text, summarize(results, grouping), grouping);
      write_file(dir / "summary.csv", text.str());
      std::cout << text.str();
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

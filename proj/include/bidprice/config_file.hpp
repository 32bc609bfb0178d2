#pragma once

// Flat `key = value` experiment config. Blank lines and `#` comments are
// ignored. Keys mirror the config struct field names; estimator fields take
// an `estimator.` prefix. Ranges and layer lists are comma-separated:
//
//   n_scenarios = 20
//   lambda_range = 2.4, 3.6
//   estimator.hidden_layer_sizes = 512, 8, 32

#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bidprice/csv.hpp"
#include "bidprice/harness.hpp"

namespace bidprice {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "n_scenarios", "n_flights", "capacity", "horizon_days", "n_dcps", "alpha", "p0", "dt",
      "master_seed", "workers", "lambda_range", "lambda_train_range", "lambda_test_range",
      "ratio_range", "estimator.kind", "estimator.hidden_layer_sizes", "estimator.batch_size",
      "estimator.learning_rate", "estimator.regularization_rate", "estimator.output_activation",
      "estimator.early_stopping_patience", "estimator.max_epochs",
      "estimator.validation_fraction", "estimator.seed"};
  return keys;
}

inline KeyValues parse_key_values(std::istream& in) {
  KeyValues values;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key(csv::trim(body.substr(0, eq)));
    const std::string value(csv::trim(body.substr(eq + 1)));
    if (!known_config_keys().contains(key))
      throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    if (!values.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
  }
  return values;
}

namespace detail {

template <typename Fn>
void with_key(const KeyValues& kv, const std::string& key, Fn&& apply) {
  const auto it = kv.find(key);
  if (it == kv.end()) return;
  try {
    apply(it->second);
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

inline Range parse_range(const std::string& text) {
  const auto parts = csv::split(text);
  if (parts.size() != 2) throw std::invalid_argument("expected 'low, high'");
  return {csv::parse_double(parts[0]), csv::parse_double(parts[1])};
}

inline void apply_settings(const KeyValues& kv, ExperimentSettings& s) {
  with_key(kv, "n_scenarios", [&](auto& v) { s.n_scenarios = csv::parse_int<int>(v); });
  with_key(kv, "n_flights", [&](auto& v) { s.n_flights = csv::parse_int<int>(v); });
  with_key(kv, "capacity", [&](auto& v) { s.capacity = csv::parse_int<int>(v); });
  with_key(kv, "horizon_days", [&](auto& v) { s.horizon_days = csv::parse_int<int>(v); });
  with_key(kv, "n_dcps", [&](auto& v) { s.n_dcps = csv::parse_int<int>(v); });
  with_key(kv, "alpha", [&](auto& v) { s.alpha = csv::parse_double(v); });
  with_key(kv, "p0", [&](auto& v) { s.p0 = csv::parse_double(v); });
  with_key(kv, "dt", [&](auto& v) { s.dt = csv::parse_double(v); });
  with_key(kv, "master_seed", [&](auto& v) { s.master_seed = csv::parse_int<std::uint64_t>(v); });
  with_key(kv, "workers", [&](auto& v) { s.workers = csv::parse_int<int>(v); });

  EstimatorConfig& e = s.estimator;
  with_key(kv, "estimator.kind", [&](auto& v) { e.kind = parse_estimator_kind(v); });
  with_key(kv, "estimator.hidden_layer_sizes", [&](auto& v) {
    e.hidden_layer_sizes.clear();
    for (const auto& part : csv::split(v)) e.hidden_layer_sizes.push_back(csv::parse_int<int>(part));
  });
  with_key(kv, "estimator.batch_size", [&](auto& v) { e.batch_size = csv::parse_int<int>(v); });
  with_key(kv, "estimator.learning_rate", [&](auto& v) { e.learning_rate = csv::parse_double(v); });
  with_key(kv, "estimator.regularization_rate",
           [&](auto& v) { e.regularization_rate = csv::parse_double(v); });
  with_key(kv, "estimator.output_activation",
           [&](auto& v) { e.output_activation = parse_output_activation(v); });
  with_key(kv, "estimator.early_stopping_patience",
           [&](auto& v) { e.early_stopping_patience = csv::parse_int<int>(v); });
  with_key(kv, "estimator.max_epochs", [&](auto& v) { e.max_epochs = csv::parse_int<int>(v); });
  with_key(kv, "estimator.validation_fraction",
           [&](auto& v) { e.validation_fraction = csv::parse_double(v); });
  with_key(kv, "estimator.seed", [&](auto& v) { e.seed = csv::parse_int<std::uint64_t>(v); });
}

}  // namespace detail

/// Overlays `kv` onto `config`. Robustness-only keys are ignored.
inline void apply_config(const KeyValues& kv, BaselineConfig& config) {
  detail::apply_settings(kv, config);
  detail::with_key(kv, "lambda_range", [&](auto& v) { config.lambda_range = detail::parse_range(v); });
}

/// Overlays `kv` onto `config`. Baseline-only keys are ignored.
inline void apply_config(const KeyValues& kv, RobustnessConfig& config) {
  detail::apply_settings(kv, config);
  detail::with_key(kv, "lambda_train_range",
                   [&](auto& v) { config.lambda_train_range = detail::parse_range(v); });
  detail::with_key(kv, "lambda_test_range",
                   [&](auto& v) { config.lambda_test_range = detail::parse_range(v); });
  detail::with_key(kv, "ratio_range", [&](auto& v) { config.ratio_range = detail::parse_range(v); });
}

}  // namespace bidprice

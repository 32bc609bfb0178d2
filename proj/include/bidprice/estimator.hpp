#pragma once

// Bid-price estimators fitted on observation-building output.
//
// Two estimators share one interface:
//  * a fully connected feed-forward regressor (ReLU hidden layers, softplus or
//    ReLU output, squared error + L2 on kernels, Adam, early stopping on a
//    flight-disjoint validation split);
//  * a cell-wise simple average over flights.
//
// Both map (remaining capacity index, DCP day) to a nonnegative bid price.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bidprice/dp_optimal.hpp"
#include "bidprice/observation_builder.hpp"
#include "bidprice/rng.hpp"

namespace bidprice {

enum class OutputActivation { relu, softplus };
enum class EstimatorKind { neural, simple_average };

inline const char* to_string(OutputActivation a) {
  return a == OutputActivation::relu ? "relu" : "softplus";
}
inline const char* to_string(EstimatorKind k) {
  return k == EstimatorKind::neural ? "neural" : "simple_average";
}
inline OutputActivation parse_output_activation(std::string_view text) {
  if (text == "relu") return OutputActivation::relu;
  if (text == "softplus") return OutputActivation::softplus;
  throw std::invalid_argument("unknown output activation '" + std::string(text) + "'");
}
inline EstimatorKind parse_estimator_kind(std::string_view text) {
  if (text == "neural") return EstimatorKind::neural;
  if (text == "simple_average") return EstimatorKind::simple_average;
  throw std::invalid_argument("unknown estimator kind '" + std::string(text) + "'");
}

/// Defaults are the tuned network from the original study.
struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::neural;
  std::vector<int> hidden_layer_sizes{512, 8, 32};
  int batch_size = 128;
  double learning_rate = 0.001;
  double regularization_rate = 0.001;
  OutputActivation output_activation = OutputActivation::softplus;
  int early_stopping_patience = 5;
  int max_epochs = 500;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden_layer_sizes.empty()) throw std::invalid_argument("estimator: need >= 1 hidden layer");
    for (int units : hidden_layer_sizes)
      if (units < 1) throw std::invalid_argument("estimator: layer sizes must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("estimator: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("estimator: learning_rate must be > 0");
    if (!(regularization_rate >= 0.0))
      throw std::invalid_argument("estimator: regularization_rate must be >= 0");
    if (early_stopping_patience < 1) throw std::invalid_argument("estimator: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("estimator: max_epochs must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw std::invalid_argument("estimator: validation_fraction must be in (0, 1)");
  }

  bool operator==(const EstimatorConfig&) const = default;
};

/// Affine input standardization plus a positive target scale, fixed at fit time.
struct FeatureScaling {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> scale{1.0, 1.0};
  double target_scale = 1.0;

  std::array<double, 2> apply(int remaining, int dcp) const {
    return {(remaining - mean[0]) / scale[0], (dcp - mean[1]) / scale[1]};
  }
  bool operator==(const FeatureScaling&) const = default;
};

/// Weights are stored input-major: weights[k * outputs + j] connects input k
/// to unit j.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

namespace detail {

inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
inline double output_value(OutputActivation activation, double z) {
  return activation == OutputActivation::softplus ? softplus(z) : std::max(0.0, z);
}
inline double output_slope(OutputActivation activation, double z) {
  return activation == OutputActivation::softplus ? sigmoid(z) : (z > 0.0 ? 1.0 : 0.0);
}

/// Forward pass for a batch of `rows` inputs laid out row-major.
/// activations[l] receives the post-activation output of layer l; the final
/// entry holds the pre-activation output z.
inline void forward(std::span<const DenseLayer> layers, std::span<const double> input, int rows,
                    std::vector<std::vector<double>>& activations) {
  activations.resize(layers.size());
  std::span<const double> in = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    auto& out = activations[l];
    out.resize(static_cast<std::size_t>(rows) * layer.outputs);
    for (int i = 0; i < rows; ++i) {
      double* o = out.data() + static_cast<std::size_t>(i) * layer.outputs;
      std::copy(layer.bias.begin(), layer.bias.end(), o);
      const double* a = in.data() + static_cast<std::size_t>(i) * layer.inputs;
      for (int k = 0; k < layer.inputs; ++k) {
        const double ak = a[k];
        if (ak == 0.0) continue;
        const double* w = layer.weights.data() + static_cast<std::size_t>(k) * layer.outputs;
        for (int j = 0; j < layer.outputs; ++j) o[j] += ak * w[j];
      }
      if (l + 1 < layers.size())
        for (int j = 0; j < layer.outputs; ++j) o[j] = o[j] > 0.0 ? o[j] : 0.0;
    }
    in = out;
  }
}

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  long step = 0;

  explicit AdamState(std::span<const DenseLayer> layers) {
    for (const auto& layer : layers) {
      m_w.emplace_back(layer.weights.size(), 0.0);
      v_w.emplace_back(layer.weights.size(), 0.0);
      m_b.emplace_back(layer.bias.size(), 0.0);
      v_b.emplace_back(layer.bias.size(), 0.0);
    }
  }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-7;

inline void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                        std::vector<double>& m, std::vector<double>& v, double step_size) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grads[i];
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grads[i] * grads[i];
    params[i] -= step_size * m[i] / (std::sqrt(v[i]) + kAdamEpsilon);
  }
}

}  // namespace detail

struct NeuralModel {
  int capacity = 0;
  EstimatorConfig config;
  FeatureScaling scaling;
  std::vector<DenseLayer> layers;
  int epochs_trained = 0;
  double best_monitor_loss = 0.0;

  double predict(int remaining, int dcp) const {
    const auto features = scaling.apply(remaining, dcp);
    std::vector<std::vector<double>> activations;
    detail::forward(layers, features, 1, activations);
    const double z = activations.back()[0];
    return scaling.target_scale * detail::output_value(config.output_activation, z);
  }

  bool operator==(const NeuralModel&) const = default;
};

struct AverageModel {
  int capacity = 0;
  std::map<std::pair<int, int>, double> cell_means;  // (capacity index, dcp) -> mean

  double predict(int remaining, int dcp) const {
    const auto it = cell_means.find({remaining, dcp});
    if (it == cell_means.end())
      throw std::out_of_range("simple average: no training data at (" + std::to_string(remaining) +
                              ", " + std::to_string(dcp) + ")");
    return it->second;
  }

  bool operator==(const AverageModel&) const = default;
};

/// Immutable after construction; safe to share across threads for prediction.
class FittedEstimator {
 public:
  explicit FittedEstimator(NeuralModel model) : model_(std::move(model)) {}
  explicit FittedEstimator(AverageModel model) : model_(std::move(model)) {}

  EstimatorKind kind() const noexcept {
    return std::holds_alternative<NeuralModel>(model_) ? EstimatorKind::neural
                                                       : EstimatorKind::simple_average;
  }
  int capacity() const noexcept {
    return std::visit([](const auto& m) { return m.capacity; }, model_);
  }
  const NeuralModel* neural() const noexcept { return std::get_if<NeuralModel>(&model_); }
  const AverageModel* simple_average() const noexcept { return std::get_if<AverageModel>(&model_); }

  double predict(int remaining, int dcp) const {
    if (remaining < 1 || remaining > capacity())
      throw std::out_of_range("predict_bid: remaining " + std::to_string(remaining) +
                              " outside [1, " + std::to_string(capacity()) + "]");
    return std::visit([&](const auto& m) { return m.predict(remaining, dcp); }, model_);
  }

  bool operator==(const FittedEstimator&) const = default;

 private:
  std::variant<NeuralModel, AverageModel> model_;
};

inline double predict_bid(const FittedEstimator& model, int remaining, int dcp) {
  return model.predict(remaining, dcp);
}

/// Flight ids split into training and validation. Validation is empty when
/// the fraction rounds down to zero flights.
struct FlightSplit {
  std::set<std::string> training;
  std::set<std::string> validation;
};

inline FlightSplit split_flights(const ObservationSet& observations, double validation_fraction,
                                 std::uint64_t seed) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& row : observations.rows)
    if (seen.insert(row.flight_id).second) ids.push_back(row.flight_id);
  Rng rng(derive_seed(seed, 1));
  shuffle(ids, rng);
  const auto n_validation = std::min(
      ids.size() - 1, static_cast<std::size_t>(std::floor(validation_fraction * ids.size())));
  FlightSplit split;
  for (std::size_t i = 0; i < ids.size(); ++i)
    (i < n_validation ? split.validation : split.training).insert(ids[i]);
  return split;
}

namespace detail {

struct Dataset {
  std::vector<double> features;  // rows x 2
  std::vector<double> targets;   // scaled
  int rows() const { return static_cast<int>(targets.size()); }
};

inline Dataset make_dataset(const ObservationSet& observations, const std::set<std::string>& flights,
                            const FeatureScaling& scaling) {
  Dataset data;
  for (const auto& row : observations.rows) {
    if (!flights.contains(row.flight_id)) continue;
    const auto f = scaling.apply(row.capacity_index, row.dcp);
    data.features.insert(data.features.end(), f.begin(), f.end());
    data.targets.push_back(row.target / scaling.target_scale);
  }
  return data;
}

inline double mean_squared_error(std::span<const DenseLayer> layers, OutputActivation activation,
                                 const Dataset& data) {
  constexpr int kChunk = 1024;
  std::vector<std::vector<double>> activations;
  double total = 0.0;
  for (int start = 0; start < data.rows(); start += kChunk) {
    const int rows = std::min(kChunk, data.rows() - start);
    forward(layers, std::span(data.features).subspan(static_cast<std::size_t>(start) * 2, rows * 2),
            rows, activations);
    for (int i = 0; i < rows; ++i) {
      const double err = output_value(activation, activations.back()[i]) - data.targets[start + i];
      total += err * err;
    }
  }
  return total / data.rows();
}

}  // namespace detail

inline FittedEstimator fit(const ObservationSet& observations, const EstimatorConfig& config) {
  config.validate();
  if (observations.empty()) throw std::invalid_argument("fit: empty observations");
  if (observations.capacity < 1) throw std::invalid_argument("fit: capacity must be >= 1");

  const FlightSplit split = split_flights(observations, config.validation_fraction, config.seed);

  NeuralModel model;
  model.capacity = observations.capacity;
  model.config = config;

  // Standardize inputs; scale targets by their mean positive value so the
  // output unit works near 1 regardless of currency.
  {
    double n = 0.0, positive_sum = 0.0, positive_count = 0.0;
    std::array<double, 2> sum{}, sum_sq{};
    for (const auto& row : observations.rows) {
      if (!split.training.contains(row.flight_id)) continue;
      const double f[2] = {static_cast<double>(row.capacity_index), static_cast<double>(row.dcp)};
      for (int d = 0; d < 2; ++d) {
        sum[d] += f[d];
        sum_sq[d] += f[d] * f[d];
      }
      n += 1.0;
      if (row.target > 0.0) {
        positive_sum += row.target;
        positive_count += 1.0;
      }
    }
    for (int d = 0; d < 2; ++d) {
      model.scaling.mean[d] = sum[d] / n;
      const double variance = std::max(0.0, sum_sq[d] / n - model.scaling.mean[d] * model.scaling.mean[d]);
      model.scaling.scale[d] = variance > 1e-12 ? std::sqrt(variance) : 1.0;
    }
    // No positive targets: a zero scale makes the model predict exactly 0,
    // which is the least-squares fit, and training is skipped.
    model.scaling.target_scale = positive_count > 0.0 ? positive_sum / positive_count : 0.0;
  }

  // Glorot-uniform kernels, zero biases.
  {
    Rng init(derive_seed(config.seed, 2));
    int inputs = 2;
    std::vector<int> widths = config.hidden_layer_sizes;
    widths.push_back(1);
    for (int outputs : widths) {
      DenseLayer layer{inputs, outputs, {}, std::vector<double>(static_cast<std::size_t>(outputs), 0.0)};
      const double limit = std::sqrt(6.0 / (inputs + outputs));
      layer.weights.resize(static_cast<std::size_t>(inputs) * outputs);
      for (auto& w : layer.weights) w = init.uniform(-limit, limit);
      model.layers.push_back(std::move(layer));
      inputs = outputs;
    }
  }
  if (model.scaling.target_scale == 0.0) return FittedEstimator(std::move(model));

  const detail::Dataset train = detail::make_dataset(observations, split.training, model.scaling);
  const detail::Dataset validation = detail::make_dataset(observations, split.validation, model.scaling);
  const detail::Dataset& monitor = validation.rows() > 0 ? validation : train;

  const auto n_layers = model.layers.size();
  detail::AdamState adam(model.layers);
  std::vector<std::vector<double>> grad_w(n_layers), grad_b(n_layers), deltas(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    grad_w[l].resize(model.layers[l].weights.size());
    grad_b[l].resize(model.layers[l].bias.size());
  }
  std::vector<std::vector<double>> activations;
  std::vector<double> batch_features;
  std::vector<int> order(static_cast<std::size_t>(train.rows()));
  for (int i = 0; i < train.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  Rng shuffler(derive_seed(config.seed, 3));

  std::vector<DenseLayer> best_layers = model.layers;
  double best_loss = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;
  const double reg2 = 2.0 * config.regularization_rate;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(order, shuffler);
    for (int start = 0; start < train.rows(); start += config.batch_size) {
      const int rows = std::min(config.batch_size, train.rows() - start);
      batch_features.resize(static_cast<std::size_t>(rows) * 2);
      for (int i = 0; i < rows; ++i) {
        const int r = order[static_cast<std::size_t>(start + i)];
        batch_features[2 * i] = train.features[2 * static_cast<std::size_t>(r)];
        batch_features[2 * i + 1] = train.features[2 * static_cast<std::size_t>(r) + 1];
      }
      detail::forward(model.layers, batch_features, rows, activations);

      // d(mean squared error)/dz at the output.
      auto& top = deltas[n_layers - 1];
      top.resize(static_cast<std::size_t>(rows));
      for (int i = 0; i < rows; ++i) {
        const double z = activations.back()[i];
        const double y = detail::output_value(config.output_activation, z);
        const double target = train.targets[static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)])];
        top[i] = 2.0 * (y - target) / rows * detail::output_slope(config.output_activation, z);
      }

      for (std::size_t l = n_layers; l-- > 0;) {
        const DenseLayer& layer = model.layers[l];
        const std::vector<double>& in = l == 0 ? batch_features : activations[l - 1];
        const std::vector<double>& delta = deltas[l];
        auto& gw = grad_w[l];
        auto& gb = grad_b[l];
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t p = 0; p < gw.size(); ++p) gw[p] = reg2 * layer.weights[p];
        for (int i = 0; i < rows; ++i) {
          const double* d = delta.data() + static_cast<std::size_t>(i) * layer.outputs;
          const double* a = in.data() + static_cast<std::size_t>(i) * layer.inputs;
          for (int j = 0; j < layer.outputs; ++j) gb[j] += d[j];
          for (int k = 0; k < layer.inputs; ++k) {
            const double ak = a[k];
            if (ak == 0.0) continue;
            double* g = gw.data() + static_cast<std::size_t>(k) * layer.outputs;
            for (int j = 0; j < layer.outputs; ++j) g[j] += ak * d[j];
          }
        }
        if (l == 0) continue;
        auto& below = deltas[l - 1];
        below.resize(static_cast<std::size_t>(rows) * layer.inputs);
        for (int i = 0; i < rows; ++i) {
          const double* d = delta.data() + static_cast<std::size_t>(i) * layer.outputs;
          const double* a = in.data() + static_cast<std::size_t>(i) * layer.inputs;
          double* b = below.data() + static_cast<std::size_t>(i) * layer.inputs;
          for (int k = 0; k < layer.inputs; ++k) {
            if (a[k] <= 0.0) {
              b[k] = 0.0;
              continue;
            }
            const double* w = layer.weights.data() + static_cast<std::size_t>(k) * layer.outputs;
            double s = 0.0;
            for (int j = 0; j < layer.outputs; ++j) s += w[j] * d[j];
            b[k] = s;
          }
        }
      }

      ++adam.step;
      const double correction1 = 1.0 - std::pow(detail::kAdamBeta1, static_cast<double>(adam.step));
      const double correction2 = 1.0 - std::pow(detail::kAdamBeta2, static_cast<double>(adam.step));
      const double step_size = config.learning_rate * std::sqrt(correction2) / correction1;
      for (std::size_t l = 0; l < n_layers; ++l) {
        detail::adam_update(model.layers[l].weights, grad_w[l], adam.m_w[l], adam.v_w[l], step_size);
        detail::adam_update(model.layers[l].bias, grad_b[l], adam.m_b[l], adam.v_b[l], step_size);
      }
    }

    model.epochs_trained = epoch;
    const double loss = detail::mean_squared_error(model.layers, config.output_activation, monitor);
    if (loss < best_loss) {
      best_loss = loss;
      best_layers = model.layers;
      epochs_without_improvement = 0;
    } else if (++epochs_without_improvement >= config.early_stopping_patience) {
      break;
    }
  }

  model.layers = std::move(best_layers);
  model.best_monitor_loss = best_loss;
  return FittedEstimator(std::move(model));
}

inline FittedEstimator fit_simple_average(const ObservationSet& observations) {
  if (observations.empty()) throw std::invalid_argument("fit_simple_average: empty observations");
  std::map<std::pair<int, int>, std::pair<double, int>> sums;
  for (const auto& row : observations.rows) {
    auto& [sum, count] = sums[{row.capacity_index, row.dcp}];
    sum += row.target;
    ++count;
  }
  AverageModel model;
  model.capacity = observations.capacity;
  for (const auto& [cell, acc] : sums) model.cell_means[cell] = acc.first / acc.second;
  return FittedEstimator(std::move(model));
}

/// Fits whichever estimator the config names.
inline FittedEstimator fit_estimator(const ObservationSet& observations, const EstimatorConfig& config) {
  return config.kind == EstimatorKind::neural ? fit(observations, config)
                                              : fit_simple_average(observations);
}

/// Per-day bid prices from DCP-level predictions: linear between DCPs, held
/// constant outside the outermost DCPs, clamped at zero.
inline BidPriceMatrix expand_to_daily(const FittedEstimator& model, int capacity, int horizon_days,
                                      const DcpGrid& grid) {
  if (grid.empty()) throw std::invalid_argument("expand_to_daily: empty DCP grid");
  if (grid[0] >= horizon_days) throw std::invalid_argument("expand_to_daily: grid exceeds horizon");
  BidPriceMatrix matrix(capacity, horizon_days, MatrixOrigin::data_driven);
  const auto boundaries = grid.boundaries();
  std::vector<double> at_dcp(boundaries.size());
  for (int x = 1; x <= capacity; ++x) {
    for (std::size_t j = 0; j < boundaries.size(); ++j) at_dcp[j] = model.predict(x, boundaries[j]);
    std::size_t j = 0;
    for (int day = horizon_days - 1; day >= 0; --day) {
      double value;
      if (day >= boundaries.front()) {
        value = at_dcp.front();
      } else if (day <= boundaries.back()) {
        value = at_dcp.back();
      } else {
        // boundaries[j] >= day > boundaries[j + 1]
        while (boundaries[j + 1] >= day) ++j;
        if (boundaries[j] == day) {
          matrix.at(x, day) = std::max(0.0, at_dcp[j]);
          continue;
        }
        const double w = static_cast<double>(day - boundaries[j + 1]) /
                         static_cast<double>(boundaries[j] - boundaries[j + 1]);
        value = at_dcp[j + 1] + w * (at_dcp[j] - at_dcp[j + 1]);
      }
      matrix.at(x, day) = std::max(0.0, value);
    }
  }
  return matrix;
}

// ---------------------------------------------------------------------------
// Persistence. JSON text container; doubles are written in shortest
// round-trip form so weights reload bit-exactly.

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const EstimatorConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"hidden_layer_sizes", c.hidden_layer_sizes},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"regularization_rate", c.regularization_rate},
          {"output_activation", to_string(c.output_activation)},
          {"early_stopping_patience", c.early_stopping_patience},
          {"max_epochs", c.max_epochs},
          {"validation_fraction", c.validation_fraction},
          {"seed", c.seed}};
}

inline EstimatorConfig estimator_config_from_json(const nlohmann::json& j) {
  EstimatorConfig c;
  c.kind = parse_estimator_kind(j.at("kind").get<std::string>());
  c.hidden_layer_sizes = j.at("hidden_layer_sizes").get<std::vector<int>>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.regularization_rate = j.at("regularization_rate").get<double>();
  c.output_activation = parse_output_activation(j.at("output_activation").get<std::string>());
  c.early_stopping_patience = j.at("early_stopping_patience").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline void save_model(std::ostream& out, const FittedEstimator& estimator) {
  nlohmann::json doc;
  doc["format"] = "bidprice-estimator";
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = to_string(estimator.kind());
  doc["capacity"] = estimator.capacity();
  if (const auto* m = estimator.neural()) {
    doc["config"] = to_json(m->config);
    doc["scaling"] = {{"mean", m->scaling.mean},
                      {"scale", m->scaling.scale},
                      {"target_scale", m->scaling.target_scale}};
    doc["epochs_trained"] = m->epochs_trained;
    doc["best_monitor_loss"] = m->best_monitor_loss;
    auto& layers = doc["layers"] = nlohmann::json::array();
    for (const auto& layer : m->layers)
      layers.push_back({{"inputs", layer.inputs},
                        {"outputs", layer.outputs},
                        {"weights", layer.weights},
                        {"bias", layer.bias}});
  } else {
    auto& cells = doc["cells"] = nlohmann::json::array();
    for (const auto& [cell, mean] : estimator.simple_average()->cell_means)
      cells.push_back({cell.first, cell.second, mean});
  }
  out << doc.dump(1) << '\n';
}

inline FittedEstimator load_model(std::istream& in) {
  const auto doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "bidprice-estimator")
    throw std::invalid_argument("load_model: not a bidprice estimator file");
  if (doc.at("format_version").get<int>() != kModelFormatVersion)
    throw std::invalid_argument("load_model: unsupported format_version");
  const int capacity = doc.at("capacity").get<int>();
  if (parse_estimator_kind(doc.at("kind").get<std::string>()) == EstimatorKind::neural) {
    NeuralModel m;
    m.capacity = capacity;
    m.config = estimator_config_from_json(doc.at("config"));
    const auto& s = doc.at("scaling");
    m.scaling.mean = s.at("mean").get<std::array<double, 2>>();
    m.scaling.scale = s.at("scale").get<std::array<double, 2>>();
    m.scaling.target_scale = s.at("target_scale").get<double>();
    m.epochs_trained = doc.at("epochs_trained").get<int>();
    m.best_monitor_loss = doc.at("best_monitor_loss").get<double>();
    for (const auto& l : doc.at("layers")) {
      DenseLayer layer{l.at("inputs").get<int>(), l.at("outputs").get<int>(),
                       l.at("weights").get<std::vector<double>>(),
                       l.at("bias").get<std::vector<double>>()};
      if (layer.weights.size() != static_cast<std::size_t>(layer.inputs) * layer.outputs ||
          layer.bias.size() != static_cast<std::size_t>(layer.outputs))
        throw std::invalid_argument("load_model: layer shape mismatch");
      m.layers.push_back(std::move(layer));
    }
    return FittedEstimator(std::move(m));
  }
  AverageModel m;
  m.capacity = capacity;
  for (const auto& cell : doc.at("cells"))
    m.cell_means[{cell.at(0).get<int>(), cell.at(1).get<int>()}] = cell.at(2).get<double>();
  return FittedEstimator(std::move(m));
}

}  // namespace bidprice

#pragma once

// Dense Q-network: ReLU hidden layers, linear output, He-normal init,
// selected-action MSE backprop with Adam (or plain SGD), per-layer freezing,
// and a versioned JSON weight document.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace uavho {

struct NetworkSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output

  std::size_t weight_layers() const { return layer_sizes.size() - 1; }
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// 13 -> 128 -> 128 -> 128 -> 3.
NetworkSpec default_network_spec();

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct QNetwork {
  NetworkSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  /// All weights (row-major per layer) then bias, layer by layer.
  std::vector<double> flatten() const;
  bool all_finite() const;
};

bool parameters_equal(const QNetwork& a, const QNetwork& b);

QNetwork init_network(const NetworkSpec& spec, std::uint64_t seed);

Eigen::VectorXd forward(const QNetwork& net, std::span<const double> input);

/// Column-per-sample batch forward; `inputs` is input_size x B.
Eigen::MatrixXd forward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs);

struct FreezeMask {
  std::vector<bool> trainable;  // one flag per weight layer

  static FreezeMask all_trainable(std::size_t layers);
  /// Freezes the first `frozen` weight layers.
  static FreezeMask freeze_first(std::size_t layers, std::size_t frozen);
  bool any_trainable() const;
};

enum class OptimizerKind { Adam, Sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global-norm clip over trainable grads; 0 disables
};

struct Gradients {
  std::vector<DenseLayer> layers;
  double loss = 0.0;
};

struct OptimizerState {
  OptimizerConfig config;
  std::int64_t step = 0;
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  Gradients scratch;  // reused by train_step so steps do not allocate
};

OptimizerState make_optimizer(const QNetwork& net, const OptimizerConfig& config);


/// Loss L = (1/B) sum_j (y_j - Q(s_j)[a_j])^2 over the selected actions only.
double batch_loss(const QNetwork& net, const Eigen::MatrixXd& inputs,
                  std::span<const double> targets, std::span<const int> actions);

Gradients compute_gradients(const QNetwork& net, const Eigen::MatrixXd& inputs,
                            std::span<const double> targets,
                            std::span<const int> actions);

/// One optimizer update on the unfrozen layers. Returns the pre-update loss.
/// Throws TrainingError when the loss is not finite.
double train_step(QNetwork& net, OptimizerState& opt, const FreezeMask& mask,
                  const Eigen::MatrixXd& inputs, std::span<const double> targets,
                  std::span<const int> actions);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kWeightFormatVersion = 1;

struct WeightDocument {
  QNetwork net;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const QNetwork& net,
                       const nlohmann::json& metadata = nlohmann::json::object());
/// Canonical text: sorted keys, shortest round-trip float rendering.
std::string serialize(const QNetwork& net,
                      const nlohmann::json& metadata = nlohmann::json::object());
WeightDocument from_json(const nlohmann::json& doc);
WeightDocument deserialize(const std::string& text);

}  // namespace uavho

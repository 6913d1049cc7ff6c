#include "uavho/qnet.hpp"

#include <cmath>
#include <random>

#include "uavho/rng.hpp"

namespace uavho {

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("network needs at least input and output sizes");
  for (int n : layer_sizes)
    if (n < 1) throw std::invalid_argument("layer sizes must be >= 1");
}

NetworkSpec default_network_spec() { return {{13, 128, 128, 128, 3}}; }

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> QNetwork::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) out.push_back(l.weights(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

bool QNetwork::all_finite() const {
  for (const auto& l : layers)
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

bool parameters_equal(const QNetwork& a, const QNetwork& b) {
  if (!(a.spec == b.spec) || a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i)
    if (a.layers[i].weights != b.layers[i].weights || a.layers[i].bias != b.layers[i].bias)
      return false;
  return true;
}

QNetwork init_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  QNetwork net;
  net.spec = spec;
  Rng rng(seed);
  for (std::size_t l = 0; l < spec.weight_layers(); ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weights(r, c) = dist(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

void check_input_rows(const QNetwork& net, Eigen::Index rows) {
  if (rows != net.spec.input_size())
    throw std::invalid_argument("input size " + std::to_string(rows) +
                                " does not match network input " +
                                std::to_string(net.spec.input_size()));
}

// Forward pass keeping every layer's activation; acts[0] is the input.
std::vector<Eigen::MatrixXd> forward_trace(const QNetwork& net,
                                           const Eigen::MatrixXd& inputs) {
  check_input_rows(net, inputs.rows());
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(net.layers.size() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd z = layer.weights * acts.back();
    z.colwise() += layer.bias;
    if (l + 1 < net.layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

void check_batch(const QNetwork& net, const Eigen::MatrixXd& inputs,
                 std::span<const double> targets, std::span<const int> actions) {
  const auto b = static_cast<std::size_t>(inputs.cols());
  if (b == 0) throw std::invalid_argument("empty batch");
  if (targets.size() != b || actions.size() != b)
    throw std::invalid_argument("batch inputs, targets and actions differ in length");
  for (int a : actions)
    if (a < 0 || a >= net.spec.output_size())
      throw std::out_of_range("batch action out of range");
}

}  // namespace

Eigen::VectorXd forward(const QNetwork& net, std::span<const double> input) {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(),
                                            static_cast<Eigen::Index>(input.size()));
  check_input_rows(net, x.size());
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Eigen::VectorXd z = net.layers[l].weights * a + net.layers[l].bias;
    a = l + 1 < net.layers.size() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd forward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs) {
  return std::move(forward_trace(net, inputs).back());
}

FreezeMask FreezeMask::all_trainable(std::size_t layers) {
  return {std::vector<bool>(layers, true)};
}

FreezeMask FreezeMask::freeze_first(std::size_t layers, std::size_t frozen) {
  if (frozen > layers) throw std::invalid_argument("cannot freeze more layers than exist");
  FreezeMask m{std::vector<bool>(layers, true)};
  for (std::size_t i = 0; i < frozen; ++i) m.trainable[i] = false;
  return m;
}

bool FreezeMask::any_trainable() const {
  for (bool t : trainable)
    if (t) return true;
  return false;
}

OptimizerState make_optimizer(const QNetwork& net, const OptimizerConfig& config) {
  OptimizerState s;
  s.config = config;
  for (const auto& l : net.layers) {
    DenseLayer zero{Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                    Eigen::VectorXd::Zero(l.bias.size())};
    s.m.push_back(zero);
    s.v.push_back(std::move(zero));
  }
  return s;
}

double batch_loss(const QNetwork& net, const Eigen::MatrixXd& inputs,
                  std::span<const double> targets, std::span<const int> actions) {
  check_batch(net, inputs, targets, actions);
  const Eigen::MatrixXd q = forward_batch(net, inputs);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double e = targets[j] - q(actions[j], j);
    sum += e * e;
  }
  return sum / static_cast<double>(q.cols());
}

namespace {

void gradients_into(const QNetwork& net, const Eigen::MatrixXd& inputs,
                    std::span<const double> targets, std::span<const int> actions,
                    Gradients& g) {
  check_batch(net, inputs, targets, actions);
  const auto acts = forward_trace(net, inputs);
  const Eigen::MatrixXd& q = acts.back();
  const double b = static_cast<double>(q.cols());

  g.layers.resize(net.layers.size());
  // dL/dq is non-zero only at each sample's taken action.
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double e = targets[j] - q(actions[j], j);
    sum += e * e;
    delta(actions[j], j) = -2.0 * e / b;
  }
  g.loss = sum / b;

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    g.layers[l].weights.noalias() = delta * acts[l].transpose();
    g.layers[l].bias.noalias() = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = net.layers[l].weights.transpose() * delta;
      // ReLU derivative; acts[l] holds post-activation values.
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
}

}  // namespace

Gradients compute_gradients(const QNetwork& net, const Eigen::MatrixXd& inputs,
                            std::span<const double> targets,
                            std::span<const int> actions) {
  Gradients g;
  gradients_into(net, inputs, targets, actions, g);
  return g;
}

double train_step(QNetwork& net, OptimizerState& opt, const FreezeMask& mask,
                  const Eigen::MatrixXd& inputs, std::span<const double> targets,
                  std::span<const int> actions) {
  if (mask.trainable.size() != net.layers.size())
    throw std::invalid_argument("freeze mask length does not match layer count");
  if (opt.m.size() != net.layers.size())
    throw std::invalid_argument("optimizer state does not match network");

  Gradients& g = opt.scratch;
  gradients_into(net, inputs, targets, actions, g);
  if (!std::isfinite(g.loss))
    throw TrainingError("non-finite loss at optimizer step " + std::to_string(opt.step));

  const auto& cfg = opt.config;
  double scale = 1.0;
  if (cfg.clip_norm > 0.0) {
    double sq = 0.0;
    for (std::size_t l = 0; l < net.layers.size(); ++l)
      if (mask.trainable[l])
        sq += g.layers[l].weights.squaredNorm() + g.layers[l].bias.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > cfg.clip_norm) scale = cfg.clip_norm / norm;
  }

  opt.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));

  auto update = [&](auto& param, auto& m, auto& v, auto& grad) {
    if (scale != 1.0) grad *= scale;
    if (cfg.kind == OptimizerKind::Sgd) {
      param.array() -= cfg.learning_rate * grad.array();
      return;
    }
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * grad.array().square();
    param.array() -= cfg.learning_rate * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + cfg.epsilon);
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!mask.trainable[l]) continue;
    update(net.layers[l].weights, opt.m[l].weights, opt.v[l].weights, g.layers[l].weights);
    update(net.layers[l].bias, opt.m[l].bias, opt.v[l].bias, g.layers[l].bias);
  }
  return g.loss;
}

nlohmann::json to_json(const QNetwork& net, const nlohmann::json& metadata) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const auto& l : net.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    weights.push_back(std::move(w));
    biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
  }
  return {{"format_version", kWeightFormatVersion},
          {"layer_sizes", net.spec.layer_sizes},
          {"activation", "relu"},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)},
          {"metadata", metadata.is_null() ? nlohmann::json::object() : metadata}};
}

std::string serialize(const QNetwork& net, const nlohmann::json& metadata) {
  return to_json(net, metadata).dump() + "\n";
}

WeightDocument from_json(const nlohmann::json& doc) {
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!doc.is_object() || !doc.contains(name))
      throw ParseError(std::string("weight document missing field '") + name + "'");
    return doc.at(name);
  };
  try {
    const int version = field("format_version").get<int>();
    if (version != kWeightFormatVersion)
      throw ParseError("unsupported weight format_version " + std::to_string(version));
    if (field("activation").get<std::string>() != "relu")
      throw ParseError("unsupported activation tag");

    WeightDocument out;
    out.net.spec.layer_sizes = field("layer_sizes").get<std::vector<int>>();
    try {
      out.net.spec.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("shape error: ") + e.what());
    }
    const auto& weights = field("weights");
    const auto& biases = field("biases");
    const std::size_t n_layers = out.net.spec.weight_layers();
    if (!weights.is_array() || !biases.is_array() || weights.size() != n_layers ||
        biases.size() != n_layers)
      throw ParseError("shape error: expected " + std::to_string(n_layers) +
                       " weight and bias arrays");
    for (std::size_t l = 0; l < n_layers; ++l) {
      const int in = out.net.spec.layer_sizes[l];
      const int rows = out.net.spec.layer_sizes[l + 1];
      const auto w = weights[l].get<std::vector<double>>();
      const auto b = biases[l].get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(rows) * in || b.size() != static_cast<std::size_t>(rows))
        throw ParseError("shape error in layer " + std::to_string(l) + ": expected " +
                         std::to_string(rows) + "x" + std::to_string(in) + " weights");
      DenseLayer layer{Eigen::MatrixXd(rows, in), Eigen::VectorXd(rows)};
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < in; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r) * in + c];
        layer.bias(r) = b[r];
      }
      out.net.layers.push_back(std::move(layer));
    }
    if (doc.contains("metadata")) out.metadata = doc.at("metadata");
    if (!out.net.all_finite()) throw ParseError("weight document has non-finite values");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed weight document: ") + e.what());
  }
}

WeightDocument deserialize(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("weight document is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

}  // namespace uavho

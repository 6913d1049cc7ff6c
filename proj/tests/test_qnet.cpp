#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "uavho/qnet.hpp"

using namespace uavho;

namespace {

struct Batch {
  Eigen::MatrixXd inputs;
  std::vector<double> targets;
  std::vector<int> actions;
};

Batch random_batch(int in, int out, int b, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Batch batch{Eigen::MatrixXd(in, b), {}, {}};
  for (int j = 0; j < b; ++j) {
    for (int i = 0; i < in; ++i) batch.inputs(i, j) = u(g);
    batch.targets.push_back(3.0 * u(g));
    batch.actions.push_back(static_cast<int>(g() % out));
  }
  return batch;
}

}  // namespace

TEST_CASE("network shape and init") {
  const NetworkSpec spec = default_network_spec();
  CHECK(spec.layer_sizes == std::vector<int>{13, 128, 128, 128, 3});
  const QNetwork net = init_network(spec, 1);
  CHECK(net.parameter_count() == 13 * 128 + 128 + 2 * (128 * 128 + 128) + 128 * 3 + 3);
  CHECK(net.flatten().size() == net.parameter_count());
  CHECK(parameters_equal(net, init_network(spec, 1)));
  CHECK_FALSE(parameters_equal(net, init_network(spec, 2)));
  // He-normal: variance 2 / fan_in
  const auto& w = net.layers[1].weights;
  const double var = w.array().square().mean();
  CHECK(var == doctest::Approx(2.0 / 128.0).epsilon(0.05));
  CHECK(net.layers[0].bias.isZero());
  NetworkSpec bad{{13}};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("forward pass matches a hand calculation") {
  QNetwork net = init_network(NetworkSpec{{2, 2, 1}}, 1);
  net.layers[0].weights << 1.0, -1.0, 0.5, 2.0;
  net.layers[0].bias << 0.0, -1.0;
  net.layers[1].weights << 2.0, 3.0;
  net.layers[1].bias << 0.25;
  const std::vector<double> x{1.0, 2.0};
  // hidden = relu([-1, 3.5]) = [0, 3.5]; out = 10.5 + 0.25
  CHECK(forward(net, x)(0) == doctest::Approx(10.75));
  Eigen::MatrixXd xb(2, 1);
  xb << 1.0, 2.0;
  CHECK(forward_batch(net, xb)(0, 0) == doctest::Approx(10.75));
}

TEST_CASE("analytic gradients match central differences") {
  const NetworkSpec spec{{4, 8, 3}};
  for (int trial = 0; trial < 10; ++trial) {
    QNetwork net = init_network(spec, 100 + trial);
    for (auto& l : net.layers) l.bias.setRandom();
    const Batch b = random_batch(4, 3, 16, 200 + trial);
    const Gradients g = compute_gradients(net, b.inputs, b.targets, b.actions);
    CHECK(g.loss == doctest::Approx(batch_loss(net, b.inputs, b.targets, b.actions)));
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      auto check = [&](double& p, double analytic) {
        const double keep = p;
        p = keep + h;
        const double up = batch_loss(net, b.inputs, b.targets, b.actions);
        p = keep - h;
        const double down = batch_loss(net, b.inputs, b.targets, b.actions);
        p = keep;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        worst = std::max(worst, std::abs(numeric - analytic) / denom);
      };
      auto& W = net.layers[l].weights;
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) check(W(r, c), g.layers[l].weights(r, c));
      for (Eigen::Index r = 0; r < net.layers[l].bias.size(); ++r)
        check(net.layers[l].bias(r), g.layers[l].bias(r));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("adam step matches the closed form on the first update") {
  QNetwork net = init_network(NetworkSpec{{3, 4, 2}}, 5);
  const Batch b = random_batch(3, 2, 8, 6);
  const Gradients g = compute_gradients(net, b.inputs, b.targets, b.actions);
  const QNetwork before = net;
  OptimizerConfig oc;
  OptimizerState opt = make_optimizer(net, oc);
  train_step(net, opt, FreezeMask::all_trainable(2), b.inputs, b.targets, b.actions);
  for (std::size_t l = 0; l < 2; ++l)
    for (Eigen::Index r = 0; r < g.layers[l].weights.rows(); ++r)
      for (Eigen::Index c = 0; c < g.layers[l].weights.cols(); ++c) {
        const double gr = g.layers[l].weights(r, c);
        // bias-corrected moments at t = 1 reduce to g and g^2
        const double expected =
            before.layers[l].weights(r, c) - oc.learning_rate * gr / (std::abs(gr) + oc.epsilon);
        CHECK(net.layers[l].weights(r, c) == doctest::Approx(expected).epsilon(1e-12));
      }
}

TEST_CASE("training reduces the loss") {
  QNetwork net = init_network(NetworkSpec{{4, 16, 3}}, 9);
  const Batch b = random_batch(4, 3, 32, 10);
  OptimizerConfig oc;
  oc.learning_rate = 1e-2;
  OptimizerState opt = make_optimizer(net, oc);
  const double first = batch_loss(net, b.inputs, b.targets, b.actions);
  for (int i = 0; i < 500; ++i)
    train_step(net, opt, FreezeMask::all_trainable(2), b.inputs, b.targets, b.actions);
  CHECK(batch_loss(net, b.inputs, b.targets, b.actions) < 0.2 * first);
}

TEST_CASE("frozen layers stay bit-identical") {
  QNetwork net = init_network(default_network_spec(), 3);
  const QNetwork before = net;
  const Batch b = random_batch(13, 3, 64, 4);
  OptimizerState opt = make_optimizer(net, OptimizerConfig{});
  const FreezeMask mask = FreezeMask::freeze_first(4, 2);
  for (int i = 0; i < 20; ++i) train_step(net, opt, mask, b.inputs, b.targets, b.actions);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(net.layers[l].weights == before.layers[l].weights);
    CHECK(net.layers[l].bias == before.layers[l].bias);
  }
  CHECK(net.layers[3].weights != before.layers[3].weights);

  QNetwork frozen = before;
  OptimizerState opt2 = make_optimizer(frozen, OptimizerConfig{});
  train_step(frozen, opt2, FreezeMask::freeze_first(4, 4), b.inputs, b.targets, b.actions);
  CHECK(parameters_equal(frozen, before));
  CHECK_FALSE(FreezeMask::freeze_first(4, 4).any_trainable());
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  for (auto kind : {OptimizerKind::Adam, OptimizerKind::Sgd}) {
    QNetwork net = init_network(NetworkSpec{{4, 8, 3}}, 3);
    const QNetwork before = net;
    OptimizerConfig oc;
    oc.kind = kind;
    oc.learning_rate = 0.0;
    OptimizerState opt = make_optimizer(net, oc);
    const Batch b = random_batch(4, 3, 8, 1);
    for (int i = 0; i < 5; ++i)
      train_step(net, opt, FreezeMask::all_trainable(2), b.inputs, b.targets, b.actions);
    CHECK(parameters_equal(net, before));
  }
}

TEST_CASE("non-finite loss raises a training error") {
  QNetwork net = init_network(NetworkSpec{{4, 8, 3}}, 3);
  Batch b = random_batch(4, 3, 8, 1);
  b.targets[0] = std::numeric_limits<double>::quiet_NaN();
  OptimizerState opt = make_optimizer(net, OptimizerConfig{});
  CHECK_THROWS_AS(
      train_step(net, opt, FreezeMask::all_trainable(2), b.inputs, b.targets, b.actions),
      TrainingError);
}

TEST_CASE("weight documents round-trip exactly") {
  const QNetwork net = init_network(default_network_spec(), 17);
  const std::string text = serialize(net, {{"path_id", 3}});
  const WeightDocument doc = deserialize(text);
  CHECK(parameters_equal(doc.net, net));
  CHECK(doc.metadata.at("path_id") == 3);
  CHECK(serialize(doc.net, doc.metadata) == text);
  CHECK(serialize(init_network(default_network_spec(), 17), {{"path_id", 3}}) == text);

  auto j = nlohmann::json::parse(text);
  CHECK(j.at("format_version") == kWeightFormatVersion);
  CHECK(j.at("activation") == "relu");
  CHECK(j.at("weights").size() == 4);
  CHECK(j.at("weights")[0].size() == 13 * 128);
  CHECK(j.at("weights")[0][1] == net.layers[0].weights(0, 1));  // row-major
}

TEST_CASE("malformed weight documents") {
  const QNetwork net = init_network(NetworkSpec{{2, 3, 1}}, 1);
  auto j = to_json(net);
  auto bad = j;
  bad["format_version"] = 2;
  CHECK_THROWS_AS(from_json(bad), ParseError);
  bad = j;
  bad["weights"][0].erase(0);
  CHECK_THROWS_WITH_AS(from_json(bad), doctest::Contains("shape"), ParseError);
  bad = j;
  bad["activation"] = "tanh";
  CHECK_THROWS_AS(from_json(bad), ParseError);
  CHECK_THROWS_AS(deserialize("{not json"), ParseError);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "helpers.hpp"
#include "uavho/agent.hpp"

using namespace uavho;

namespace {

Transition make_transition(double tag, bool done = false) {
  Transition t;
  t.state.fill(tag);
  t.next_state.fill(-tag / 100.0);
  t.reward = tag;
  t.action = static_cast<int>(tag) % 3;
  t.done = done;
  return t;
}

AgentConfig small_config() {
  AgentConfig cfg;
  cfg.network = NetworkSpec{{13, 16, 16, 3}};
  cfg.batch_size = 8;
  cfg.learning_starts = 20;
  cfg.target_sync_interval = 50;
  cfg.buffer_capacity = 500;
  return cfg;
}

}  // namespace

TEST_CASE("replay buffer is a bounded FIFO") {
  ReplayBuffer buf(4);
  for (int i = 0; i < 3; ++i) buf.push(make_transition(i));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).reward == 0.0);
  for (int i = 3; i < 7; ++i) buf.push(make_transition(i));
  CHECK(buf.size() == 4);
  CHECK(buf.capacity() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(buf.at(i).reward == double(i + 3));
  CHECK_THROWS(buf.at(4));
  CHECK_THROWS(ReplayBuffer(0));
}

TEST_CASE("replay sampling draws distinct stored transitions") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) buf.push(make_transition(i));
  Rng rng(2);
  std::vector<int> hits(100, 0);
  for (int round = 0; round < 400; ++round) {
    const auto batch = buf.sample(10, rng);
    std::set<double> seen;
    for (const auto& t : batch) {
      seen.insert(t.reward);
      ++hits[static_cast<int>(t.reward)];
    }
    CHECK(seen.size() == 10);
  }
  // 4000 draws over 100 slots: every slot should be hit
  CHECK(*std::min_element(hits.begin(), hits.end()) > 10);
  ReplayBuffer small(10);
  small.push(make_transition(1));
  CHECK_THROWS_AS(small.sample(2, rng), std::logic_error);
}

TEST_CASE("epsilon schedule") {
  AgentConfig cfg;
  CHECK(epsilon_for_episode(cfg, 0) == 1.0);
  CHECK(epsilon_for_episode(cfg, 1) == doctest::Approx(0.995));
  CHECK(epsilon_for_episode(cfg, 100) == doctest::Approx(std::pow(0.995, 100)));
  CHECK(epsilon_for_episode(cfg, 499) == doctest::Approx(0.0817).epsilon(1e-3));
  CHECK(epsilon_for_episode(cfg, 5000) == 0.01);
}

TEST_CASE("action selection") {
  CHECK(greedy_action(std::vector<double>{1.0, 3.0, 3.0}) == 1);
  CHECK(greedy_action(std::vector<double>{-1.0, -2.0, -3.0}) == 0);
  const QNetwork net = init_network(NetworkSpec{{13, 8, 3}}, 1);
  StateVector s{};
  s.fill(0.3);
  const Eigen::VectorXd q = forward(net, s);
  const int best = greedy_action(std::vector<double>(q.data(), q.data() + 3));
  Rng rng(4);
  for (int i = 0; i < 50; ++i) CHECK(select_action(net, s, 0.0, rng) == best);
  std::set<int> seen;
  for (int i = 0; i < 200; ++i) seen.insert(select_action(net, s, 1.0, rng));
  CHECK(seen.size() == 3);
}

TEST_CASE("bootstrap targets for DQN and DDQN") {
  const NetworkSpec spec{{13, 8, 3}};
  const QNetwork online = init_network(spec, 1);
  const QNetwork target = init_network(spec, 2);
  std::vector<Transition> batch;
  for (int i = 0; i < 6; ++i) batch.push_back(make_transition(0.1 * i + 0.05, i == 5));
  const auto ddqn = compute_targets(Algorithm::DDQN, online, target, batch, 0.9);
  const auto dqn = compute_targets(Algorithm::DQN, online, target, batch, 0.9);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& t = batch[j];
    if (t.done) {
      CHECK(ddqn[j] == t.reward);
      CHECK(dqn[j] == t.reward);
      continue;
    }
    const Eigen::VectorXd qo = forward(online, t.next_state);
    const Eigen::VectorXd qt = forward(target, t.next_state);
    Eigen::Index a_star = 0;
    qo.maxCoeff(&a_star);
    CHECK(ddqn[j] == doctest::Approx(t.reward + 0.9 * qt(a_star)).epsilon(1e-14));
    CHECK(dqn[j] == doctest::Approx(t.reward + 0.9 * qt.maxCoeff()).epsilon(1e-14));
  }
}

TEST_CASE("agent config validation") {
  AgentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.discount = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = AgentConfig{};
  cfg.network = NetworkSpec{{12, 8, 3}};
  CHECK_THROWS(cfg.validate());
  CHECK(algorithm_from_string("dqn") == Algorithm::DQN);
  CHECK_THROWS(algorithm_from_string("a2c"));
}

TEST_CASE("target network syncs every C steps and is constant in between") {
  const Scenario sc = default_scenario();
  const FlightPath path = testutil::straight_path(1, 80);
  AgentConfig cfg = small_config();
  TrainOptions opts;
  std::vector<double> last_target;
  int syncs = 0;
  bool ok = true;
  opts.hooks.on_step = [&](std::int64_t step, const QNetwork& online, const QNetwork& target) {
    const auto flat = target.flatten();
    if (step % cfg.target_sync_interval == 0) {
      ok &= parameters_equal(online, target);
      ++syncs;
    } else if (!last_target.empty()) {
      ok &= flat == last_target;
    }
    last_target = flat;
  };
  const auto res = train(sc, path, cfg, 3, 6, opts);
  CHECK(ok);
  CHECK(res.report.global_steps == 6 * 79);
  CHECK(syncs == int(res.report.global_steps / 50));
}

TEST_CASE("learning starts after the warm-up and uses full batches") {
  const Scenario sc = default_scenario();
  const FlightPath path = testutil::straight_path(1, 30);
  AgentConfig cfg = small_config();
  int first_batch_step = -1;
  std::int64_t steps = 0;
  TrainOptions opts;
  opts.hooks.on_step = [&](std::int64_t s, const QNetwork&, const QNetwork&) { steps = s; };
  opts.hooks.on_batch = [&](std::span<const Transition> b, std::span<const double> y) {
    CHECK(b.size() == 8);
    CHECK(y.size() == 8);
    if (first_batch_step < 0) first_batch_step = static_cast<int>(steps + 1);
  };
  const auto res = train(sc, path, cfg, 1, 2, opts);
  CHECK(first_batch_step == 20);
  CHECK(res.report.episodes[0].mean_loss > 0.0);
}

TEST_CASE("training is deterministic and reports every episode") {
  const Scenario sc = default_scenario();
  const FlightPath path = testutil::straight_path(2, 60);
  const AgentConfig cfg = small_config();
  const auto a = train(sc, path, cfg, 9, 4);
  const auto b = train(sc, path, cfg, 9, 4);
  CHECK(parameters_equal(a.net, b.net));
  REQUIRE(a.report.episodes.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.report.episodes[i].reward == b.report.episodes[i].reward);
    CHECK(a.report.episodes[i].steps == 59);
    CHECK(a.report.episodes[i].epsilon == epsilon_for_episode(cfg, int(i)));
  }
  const auto c = train(sc, path, cfg, 10, 4);
  CHECK_FALSE(parameters_equal(a.net, c.net));
}

TEST_CASE("runs with the same seed share their initial network") {
  const Scenario sc = default_scenario();
  AgentConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  const auto a = train(sc, testutil::straight_path(1, 30), cfg, 5, 1);
  const auto b = train(sc, testutil::straight_path(2, 30, 900.0), cfg, 5, 1);
  CHECK(parameters_equal(a.net, b.net));
  CHECK(parameters_equal(a.net, init_network(cfg.network, stream_seed(5, Stream::Init))));
}

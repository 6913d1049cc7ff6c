#pragma once

// DQN / Double-DQN training over one flight path: replay buffer, epsilon-greedy
// exploration, bootstrap targets and periodic target-network sync.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "uavho/environment.hpp"
#include "uavho/qnet.hpp"

namespace uavho {

struct Transition {
  StateVector state{};
  int action = 0;
  double reward = 0.0;
  StateVector next_state{};
  bool done = false;
};

/// Bounded FIFO; once full, each push overwrites the oldest transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  /// B distinct transitions, uniformly without replacement.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // slot of the oldest element once full
  std::vector<Transition> data_;
};

enum class Algorithm { DQN, DDQN };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view s);

struct AgentConfig {
  Algorithm algorithm = Algorithm::DDQN;
  double discount = 0.99;
  double epsilon_start = 1.0;
  double epsilon_min = 0.01;
  double epsilon_decay = 0.995;  // per episode
  std::size_t batch_size = 64;
  std::int64_t target_sync_interval = 1000;  // global environment steps
  double learning_rate = 1e-3;
  std::size_t buffer_capacity = 10000;
  std::size_t learning_starts = 500;  // learning waits for max(B, this) transitions
  NetworkSpec network = default_network_spec();
  OptimizerKind optimizer = OptimizerKind::Adam;
  double clip_norm = 0.0;

  void validate() const;
};

/// max(epsilon_min, epsilon_start * epsilon_decay^episode).
double epsilon_for_episode(const AgentConfig& cfg, int episode);

/// Argmax with ties to the lowest index.
int greedy_action(std::span<const double> q_values);

int select_action(const QNetwork& net, const StateVector& state, double epsilon,
                  Rng& rng);

/// y_j = r_j for terminal transitions, otherwise r_j + discount * Q_target(s', a')
/// with a' = argmax Q_online(s') (DDQN) or the target net's own argmax (DQN).
std::vector<double> compute_targets(Algorithm algorithm, const QNetwork& online,
                                    const QNetwork& target,
                                    std::span<const Transition> batch, double discount);

struct EpisodeRecord {
  int episode = 0;
  double reward = 0.0;
  int handovers = 0;
  int outages = 0;
  int steps = 0;
  double epsilon = 0.0;
  double mean_loss = 0.0;  // 0 when no update ran in the episode
};

struct TrainReport {
  std::vector<EpisodeRecord> episodes;
  std::int64_t global_steps = 0;
  double wall_time_s = 0.0;
};

struct TrainHooks {
  /// Called after each environment step, after any learning update and sync.
  std::function<void(std::int64_t global_step, const QNetwork& online,
                     const QNetwork& target)>
      on_step;
  std::function<void(const EpisodeRecord&)> on_episode;
  /// Called on every learning update with the sampled batch and its targets.
  std::function<void(std::span<const Transition>, std::span<const double>)> on_batch;
};

struct TrainOptions {
  std::optional<QNetwork> initial_net;
  std::optional<FreezeMask> freeze;
  TrainHooks hooks;
};

struct TrainResult {
  QNetwork net;
  TrainReport report;
};

/// Runs `episodes` training episodes on one path. The initial weights depend
/// only on `seed`, so runs sharing a seed start from the same network;
/// exploration, replay sampling and channel draws also key on the path id.
TrainResult train(const Scenario& scenario, const FlightPath& path,
                  const AgentConfig& cfg, std::uint64_t seed, int episodes,
                  const TrainOptions& options = {});

/// Seed of the channel stream for one episode.
std::uint64_t episode_seed(std::uint64_t root, int path_id, int episode);

}  // namespace uavho

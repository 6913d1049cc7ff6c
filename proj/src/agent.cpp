#include "uavho/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uavho {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (size_ < capacity_) {
    data_.push_back(t);
    ++size_;
    return;
  }
  data_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index out of range");
  return data_[(head_ + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (batch == 0) throw std::invalid_argument("batch size must be >= 1");
  if (size_ < batch)
    throw std::logic_error("replay buffer holds " + std::to_string(size_) +
                           " transitions, fewer than batch " + std::to_string(batch));
  // Floyd's algorithm: B distinct indices with B draws.
  std::vector<std::size_t> picked;
  picked.reserve(batch);
  for (std::size_t j = size_ - batch; j < size_; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
    picked.push_back(seen ? j : t);
  }
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i : picked) out.push_back(at(i));
  return out;
}

std::string_view to_string(Algorithm a) { return a == Algorithm::DQN ? "dqn" : "ddqn"; }

Algorithm algorithm_from_string(std::string_view s) {
  if (s == "dqn") return Algorithm::DQN;
  if (s == "ddqn") return Algorithm::DDQN;
  throw std::invalid_argument("unknown agent algorithm '" + std::string(s) + "' (dqn|ddqn)");
}

void AgentConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(discount > 0.0 && discount <= 1.0, "agent.discount must be in (0, 1]");
  require(epsilon_min >= 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0,
          "agent epsilons must satisfy 0 <= epsilon_min <= epsilon_start <= 1");
  require(epsilon_decay > 0.0 && epsilon_decay <= 1.0,
          "agent.epsilon_decay must be in (0, 1]");
  require(batch_size >= 1, "agent.batch_size must be >= 1");
  require(target_sync_interval >= 1, "agent.target_sync_interval must be >= 1");
  require(learning_rate >= 0.0, "agent.learning_rate must be >= 0");
  require(buffer_capacity >= batch_size, "agent.buffer_capacity must be >= batch_size");
  network.validate();
  require(network.input_size() == static_cast<int>(kStateSize),
          "network input must match the 13-component state");
  require(network.output_size() == static_cast<int>(kActionCount),
          "network output must match the 3 actions");
}

double epsilon_for_episode(const AgentConfig& cfg, int episode) {
  return std::max(cfg.epsilon_min,
                  cfg.epsilon_start * std::pow(cfg.epsilon_decay, episode));
}

int greedy_action(std::span<const double> q_values) {
  return static_cast<int>(std::max_element(q_values.begin(), q_values.end()) -
                          q_values.begin());
}

int select_action(const QNetwork& net, const StateVector& state, double epsilon,
                  Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon outside [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon)
    return std::uniform_int_distribution<int>(0, static_cast<int>(kActionCount) - 1)(rng);
  const Eigen::VectorXd q = forward(net, state);
  return greedy_action(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

namespace {

Eigen::MatrixXd stack_states(std::span<const Transition> batch, bool next) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(kStateSize),
                    static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& s = next ? batch[j].next_state : batch[j].state;
    for (std::size_t i = 0; i < kStateSize; ++i) m(i, j) = s[i];
  }
  return m;
}

int column_argmax(const Eigen::MatrixXd& q, Eigen::Index col) {
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.rows(); ++a)
    if (q(a, col) > q(best, col)) best = a;
  return static_cast<int>(best);
}

}  // namespace

std::vector<double> compute_targets(Algorithm algorithm, const QNetwork& online,
                                    const QNetwork& target,
                                    std::span<const Transition> batch, double discount) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const Eigen::MatrixXd next = stack_states(batch, true);
  const Eigen::MatrixXd q_target = forward_batch(target, next);
  Eigen::MatrixXd q_online;
  if (algorithm == Algorithm::DDQN) q_online = forward_batch(online, next);

  std::vector<double> y(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if (batch[j].done) {
      y[j] = batch[j].reward;
      continue;
    }
    const int a = algorithm == Algorithm::DDQN ? column_argmax(q_online, col)
                                               : column_argmax(q_target, col);
    y[j] = batch[j].reward + discount * q_target(a, col);
  }
  return y;
}

std::uint64_t episode_seed(std::uint64_t root, int path_id, int episode) {
  return stream_seed(root, Stream::Channel,
                     {static_cast<std::uint64_t>(path_id), static_cast<std::uint64_t>(episode)});
}

TrainResult train(const Scenario& scenario, const FlightPath& path,
                  const AgentConfig& cfg, std::uint64_t seed, int episodes,
                  const TrainOptions& options) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  cfg.validate();
  scenario.validate();
  path.validate(scenario);

  const auto started = std::chrono::steady_clock::now();
  QNetwork online = options.initial_net ? *options.initial_net
                                        : init_network(cfg.network, stream_seed(seed, Stream::Init));
  if (!(online.spec == cfg.network))
    throw std::invalid_argument("initial network shape differs from agent.network");
  QNetwork target = online;
  const FreezeMask mask =
      options.freeze ? *options.freeze : FreezeMask::all_trainable(online.layers.size());
  if (mask.trainable.size() != online.layers.size())
    throw std::invalid_argument("freeze mask length does not match layer count");

  OptimizerConfig opt_cfg;
  opt_cfg.kind = cfg.optimizer;
  opt_cfg.learning_rate = cfg.learning_rate;
  opt_cfg.clip_norm = cfg.clip_norm;
  OptimizerState opt = make_optimizer(online, opt_cfg);

  const auto pid = static_cast<std::uint64_t>(path.id);
  Rng explore_rng(stream_seed(seed, Stream::Exploration, {pid}));
  Rng replay_rng(stream_seed(seed, Stream::Replay, {pid}));
  ReplayBuffer buffer(cfg.buffer_capacity);
  const std::size_t warm = std::max(cfg.batch_size, cfg.learning_starts);

  std::vector<int> actions(cfg.batch_size);
  TrainResult result;
  std::int64_t global_step = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    const double epsilon = epsilon_for_episode(cfg, ep);
    EnvState env = reset(scenario, path, episode_seed(seed, path.id, ep));
    StateVector state = observe(env, scenario, path);
    double loss_sum = 0.0;
    int updates = 0;
    int steps = 0;

    while (!env.done) {
      const int action = select_action(online, state, epsilon, explore_rng);
      const StepOutcome out = apply_action(env, action, scenario, path);
      buffer.push({state, action, out.reward, out.next_state, out.done});
      state = out.next_state;
      ++steps;
      ++global_step;

      if (buffer.size() >= warm) {
        const auto batch = buffer.sample(cfg.batch_size, replay_rng);
        const auto y = compute_targets(cfg.algorithm, online, target, batch, cfg.discount);
        for (std::size_t j = 0; j < batch.size(); ++j) actions[j] = batch[j].action;
        Eigen::MatrixXd inputs(static_cast<Eigen::Index>(kStateSize),
                               static_cast<Eigen::Index>(batch.size()));
        for (std::size_t j = 0; j < batch.size(); ++j)
          for (std::size_t i = 0; i < kStateSize; ++i) inputs(i, j) = batch[j].state[i];
        if (options.hooks.on_batch) options.hooks.on_batch(batch, y);
        loss_sum += train_step(online, opt, mask, inputs, y, actions);
        ++updates;
      }
      if (global_step % cfg.target_sync_interval == 0) target = online;
      if (options.hooks.on_step) options.hooks.on_step(global_step, online, target);
    }

    EpisodeRecord rec;
    rec.episode = ep;
    rec.reward = env.cum_reward;
    rec.handovers = env.handovers;
    rec.outages = env.outages;
    rec.steps = steps;
    rec.epsilon = epsilon;
    rec.mean_loss = updates > 0 ? loss_sum / updates : 0.0;
    result.report.episodes.push_back(rec);
    if (options.hooks.on_episode) options.hooks.on_episode(rec);
  }

  result.report.global_steps = global_step;
  result.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.net = std::move(online);
  return result;
}

}  // namespace uavho

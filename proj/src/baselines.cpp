#include "uavho/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "uavho/agent.hpp"

namespace uavho {

void BaselineConfig::validate() const {
  if (!(greedy_margin_db >= 0.0) || !(hysteresis_margin_db >= 0.0))
    throw std::invalid_argument("baseline margins must be >= 0");
  if (ttt_steps < 1) throw std::invalid_argument("baselines.ttt_steps must be >= 1");
  if (mop_horizon_steps < 1)
    throw std::invalid_argument("baselines.mop_horizon_steps must be >= 1");
}

int greedy_decide(std::span<const double> sinr_db, int serving, double margin_db) {
  const int best = strongest(sinr_db);
  return sinr_db[best] > sinr_db[serving] + margin_db ? best : serving;
}

int hysteresis_decide(std::span<const double> sinr_db, HysteresisState& state,
                      int serving, double margin_db, int ttt_steps) {
  state.counters.resize(sinr_db.size(), 0);
  int chosen = serving;
  for (std::size_t i = 0; i < sinr_db.size(); ++i) {
    if (static_cast<int>(i) == serving) {
      state.counters[i] = 0;
      continue;
    }
    if (sinr_db[i] > sinr_db[serving] + margin_db)
      state.counters[i] = std::min(state.counters[i] + 1, ttt_steps);
    else
      state.counters[i] = 0;
    if (state.counters[i] >= ttt_steps &&
        (chosen == serving || sinr_db[i] > sinr_db[chosen]))
      chosen = static_cast<int>(i);
  }
  if (chosen != serving) std::fill(state.counters.begin(), state.counters.end(), 0);
  return chosen;
}

int mop_select(std::span<const double> current_sinr_db,
               const std::vector<std::vector<double>>& predicted_sinr_db,
               double threshold_db) {
  const std::size_t m = current_sinr_db.size();
  if (m == 0) throw std::invalid_argument("empty SINR list");
  if (predicted_sinr_db.empty()) throw std::invalid_argument("empty prediction horizon");

  int best = -1;
  int best_outages = 0;
  for (std::size_t i = 0; i < m; ++i) {
    int outages = 0;
    for (const auto& row : predicted_sinr_db) outages += row.at(i) < threshold_db ? 1 : 0;
    // Equal horizons, so comparing counts is comparing fractions.
    const bool better =
        best < 0 || outages < best_outages ||
        (outages == best_outages && current_sinr_db[i] > current_sinr_db[best]);
    if (better) {
      best = static_cast<int>(i);
      best_outages = outages;
    }
  }
  return best;
}

int mop_decide(const Scenario& scenario, const FlightPath& path, std::size_t step,
               std::span<const double> current_sinr_db, int horizon,
               double threshold_db) {
  if (horizon < 1) throw std::invalid_argument("MOP horizon must be >= 1");
  std::vector<std::vector<double>> predicted;
  for (std::size_t t = step + 1; t <= step + static_cast<std::size_t>(horizon) &&
                                 t < path.points.size();
       ++t)
    predicted.push_back(expected_sinrs(path.points[t], scenario));
  if (predicted.empty()) return strongest(current_sinr_db);
  return mop_select(current_sinr_db, predicted, threshold_db);
}

int GreedyPolicy::decide(const EnvState& env, const Scenario&, const FlightPath&) {
  return greedy_decide(env.sinr_db, env.serving_bs, margin_db_);
}

void HysteresisPolicy::begin_episode(const Scenario& scenario, const FlightPath&) {
  state_.counters.assign(scenario.bs_count(), 0);
}

int HysteresisPolicy::decide(const EnvState& env, const Scenario&, const FlightPath&) {
  return hysteresis_decide(env.sinr_db, state_, env.serving_bs, margin_db_, ttt_steps_);
}

void MopPolicy::begin_episode(const Scenario& scenario, const FlightPath& path) {
  expected_.clear();
  expected_.reserve(path.points.size());
  for (const auto& p : path.points) expected_.push_back(expected_sinrs(p, scenario));
}

int MopPolicy::decide(const EnvState& env, const Scenario& scenario,
                      const FlightPath& path) {
  if (expected_.size() != path.points.size()) begin_episode(scenario, path);
  const std::size_t first = env.step + 1;
  const std::size_t last = std::min(env.step + static_cast<std::size_t>(horizon_),
                                    path.points.size() - 1);
  std::vector<std::vector<double>> predicted(expected_.begin() + first,
                                             expected_.begin() + last + 1);
  return mop_select(env.sinr_db, predicted, scenario.channel.sinr_threshold_db);
}

int AgentPolicy::decide(const EnvState& env, const Scenario& scenario,
                        const FlightPath& path) {
  const StateVector s = observe(env, scenario, path);
  const Eigen::VectorXd q = forward(*net_, s);
  const int action =
      greedy_action(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
  return env.candidates.ids[action];
}

std::unique_ptr<Policy> make_baseline(const std::string& name, const BaselineConfig& cfg) {
  cfg.validate();
  if (name == "greedy") return std::make_unique<GreedyPolicy>(cfg.greedy_margin_db);
  if (name == "hysteresis")
    return std::make_unique<HysteresisPolicy>(cfg.hysteresis_margin_db, cfg.ttt_steps);
  if (name == "mop") return std::make_unique<MopPolicy>(cfg.mop_horizon_steps);
  if (name == "keep") return std::make_unique<KeepPolicy>();
  throw std::invalid_argument("unknown baseline policy '" + name + "'");
}

}  // namespace uavho

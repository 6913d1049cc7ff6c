#pragma once

// Non-learning handover rules (greedy, hysteresis with time-to-trigger,
// minimum predicted outage) and the policy interface shared with the agent.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uavho/environment.hpp"
#include "uavho/qnet.hpp"

namespace uavho {

struct BaselineConfig {
  double greedy_margin_db = 3.0;
  double hysteresis_margin_db = 3.0;
  int ttt_steps = 20;  // 2 s at dt = 0.1 s
  int mop_horizon_steps = 5;

  void validate() const;
};

/// Switch to the strongest BS only if it beats the serving one by more than
/// `margin_db`; ties for strongest go to the lower id.
int greedy_decide(std::span<const double> sinr_db, int serving, double margin_db);

/// Consecutive-step counters of the handover condition, one per BS.
struct HysteresisState {
  std::vector<int> counters;
};

/// Feeds one step of SINRs. A BS qualifies once it has beaten the serving BS
/// by more than `margin_db` for `ttt_steps` consecutive steps; any violation
/// resets its counter. Among qualified BSs the strongest now wins. All
/// counters reset on a handover.
int hysteresis_decide(std::span<const double> sinr_db, HysteresisState& state,
                      int serving, double margin_db, int ttt_steps);

/// Picks the BS with the lowest predicted outage fraction; `predicted_sinr_db`
/// holds one all-BS SINR row per horizon step. Ties: higher current SINR, then
/// lower id.
int mop_select(std::span<const double> current_sinr_db,
               const std::vector<std::vector<double>>& predicted_sinr_db,
               double threshold_db);

/// Predicts with the expected-mode channel over path points t+1..t+H
/// (truncated at the end of the path).
int mop_decide(const Scenario& scenario, const FlightPath& path, std::size_t step,
               std::span<const double> current_sinr_db, int horizon,
               double threshold_db);

/// Chooses the serving BS for the next move. One instance per episode.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const Scenario&, const FlightPath&) {}
  virtual int decide(const EnvState& env, const Scenario& scenario,
                     const FlightPath& path) = 0;
};

class KeepPolicy final : public Policy {
 public:
  std::string name() const override { return "keep"; }
  int decide(const EnvState& env, const Scenario&, const FlightPath&) override {
    return env.serving_bs;
  }
};

class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(double margin_db) : margin_db_(margin_db) {}
  std::string name() const override { return "greedy"; }
  int decide(const EnvState& env, const Scenario&, const FlightPath&) override;

 private:
  double margin_db_;
};

class HysteresisPolicy final : public Policy {
 public:
  HysteresisPolicy(double margin_db, int ttt_steps)
      : margin_db_(margin_db), ttt_steps_(ttt_steps) {}
  std::string name() const override { return "hysteresis"; }
  void begin_episode(const Scenario& scenario, const FlightPath&) override;
  int decide(const EnvState& env, const Scenario&, const FlightPath&) override;

 private:
  double margin_db_;
  int ttt_steps_;
  HysteresisState state_;
};

class MopPolicy final : public Policy {
 public:
  explicit MopPolicy(int horizon) : horizon_(horizon) {}
  std::string name() const override { return "mop"; }
  void begin_episode(const Scenario& scenario, const FlightPath& path) override;
  int decide(const EnvState& env, const Scenario& scenario,
             const FlightPath& path) override;

 private:
  int horizon_;
  std::vector<std::vector<double>> expected_;  // per path point
};

/// Greedy (epsilon = 0) use of a trained Q-network over the candidate set.
class AgentPolicy final : public Policy {
 public:
  AgentPolicy(std::string name, std::shared_ptr<const QNetwork> net)
      : name_(std::move(name)), net_(std::move(net)) {}
  std::string name() const override { return name_; }
  int decide(const EnvState& env, const Scenario& scenario,
             const FlightPath& path) override;

 private:
  std::string name_;
  std::shared_ptr<const QNetwork> net_;
};

std::unique_ptr<Policy> make_baseline(const std::string& name, const BaselineConfig& cfg);

}  // namespace uavho

#pragma once

// Discrete-time handover episode over one flight path.
//
// At step t the UAV is at path point t and served by `serving_bs`. The agent
// observes its own and next position plus the current three-candidate SINR
// set, then picks the serving BS for the move to point t+1. The channel is
// evaluated once per point; outage and reward are scored on the new point.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "uavho/rng.hpp"
#include "uavho/scenario.hpp"

namespace uavho {

inline constexpr std::size_t kStateSize = 13;
inline constexpr std::size_t kActionCount = 3;

// Observation normalization ranges.
inline constexpr double kSinrClipLowDb = -20.0;
inline constexpr double kSinrClipHighDb = 60.0;
inline constexpr double kAltitudeScaleM = 100.0;

using StateVector = std::array<double, kStateSize>;

/// Slot 0 is the serving BS; slots 1-2 are the strongest non-serving BSs,
/// descending by SINR with ties broken by lower id.
struct CandidateSet {
  std::array<int, 3> ids{};
  std::array<double, 3> sinrs_db{};

  int serving() const { return ids[0]; }
};

struct EnvState {
  std::size_t step = 0;
  int serving_bs = 0;
  CandidateSet candidates;
  /// SINR of every BS at the current point, each evaluated as if serving.
  std::vector<double> sinr_db;
  bool done = false;
  int handovers = 0;
  int outages = 0;
  double cum_reward = 0.0;
  Rng rng;
};

struct StepOutcome {
  StateVector next_state{};
  double reward = 0.0;
  int outage = 0;
  int handover = 0;
  bool done = false;
  int serving_bs = 0;
  double serving_sinr_db = 0.0;
};

/// All-BS SINRs at `pos` with the scenario's channel mode.
std::vector<double> sample_sinrs(const Vec3& pos, const Scenario& scenario, Rng& rng);

/// All-BS SINRs at `pos` under the expected (LoS-probability weighted) channel,
/// independent of the scenario's mode.
std::vector<double> expected_sinrs(const Vec3& pos, const Scenario& scenario);

/// Index of the strongest BS; ties go to the lower id.
int strongest(std::span<const double> sinr_db);

CandidateSet build_candidates(int serving, std::span<const double> sinr_db);

double sigmoid(double z);

double compute_reward(int prev_serving, int new_serving, double sinr_new_db,
                      double sinr_prev_bs_db, const RewardConfig& cfg, int outage);

EnvState reset(const Scenario& scenario, const FlightPath& path,
               std::uint64_t episode_seed);

StateVector observe(const EnvState& env, const Scenario& scenario,
                    const FlightPath& path);

/// Maps action 0 (keep), 1 (candidate slot 2) or 2 (slot 3) to a BS id and
/// advances the episode.
StepOutcome apply_action(EnvState& env, int action, const Scenario& scenario,
                         const FlightPath& path);

/// Advances the episode with an explicit serving choice; any BS is allowed.
StepOutcome apply_serving(EnvState& env, int new_serving, const Scenario& scenario,
                          const FlightPath& path);

}  // namespace uavho

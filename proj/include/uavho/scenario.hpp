#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "uavho/channel.hpp"

namespace uavho {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

struct BaseStation {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double h_bs_m = 25.0;
  double tx_power_dbm = 45.0;
};

/// Weights and shape of the per-step penalty
/// R = -alpha_o * outage - beta_h * [switch] * eta * sigmoid((dSINR - margin) / tau).
struct RewardConfig {
  double alpha_o = 1.0;
  double beta_h = 1.0;
  double tau = 1.0;
  double eta = 1.0;
  double ho_margin_db = 3.0;

  void validate() const;
};

struct UavConfig {
  double speed_mps = 10.0;
  double dt_s = 0.1;
  double max_altitude_m = 30.0;
};

struct Scenario {
  double area_l_m = 2000.0;
  double area_w_m = 2000.0;
  /// Sorted by id; ids are 0..M-1 so an id doubles as the BS index.
  std::vector<BaseStation> base_stations;
  channel::ChannelParams channel;
  RewardConfig reward;
  UavConfig uav;

  std::size_t bs_count() const { return base_stations.size(); }
  double step_length_m() const { return uav.speed_mps * uav.dt_s; }
  std::vector<double> tx_powers_dbm() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Five BSs: one at the centre of a 2000 x 2000 m area, four at (+-600, +-600)
/// m from it; 25 m masts at 45 dBm, 2.1 GHz, -100 dBm noise.
Scenario default_scenario();

enum class FlightPhase : std::uint8_t { Takeoff, Cruise, Landing };

std::string_view to_string(FlightPhase phase);

struct FlightPath {
  int id = 0;
  std::vector<Vec3> points;
  /// Empty, or one marker per point.
  std::vector<FlightPhase> phases;

  std::size_t length() const { return points.size(); }
  void validate(const Scenario& scenario) const;
};

/// Seeded synthetic missions: a climbing takeoff to a cruise altitude, a cruise
/// with 3-6 turns, and a descending landing. Points are spaced speed*dt apart
/// along the polyline (closer only across corners and at the final point).
/// Path ids are 1..count.
std::vector<FlightPath> generate_paths(const Scenario& scenario, int count,
                                       std::uint64_t seed);

}  // namespace uavho

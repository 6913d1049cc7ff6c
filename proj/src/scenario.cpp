#include "uavho/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "uavho/rng.hpp"

namespace uavho {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Geometry of the generated missions.
constexpr double kEdgeMarginM = 100.0;
constexpr double kMinCruiseAltitudeM = 22.5;
constexpr double kClimbRatio = 2.5;  // horizontal metres per metre of climb
constexpr double kMinLegM = 60.0;
constexpr double kMaxLegM = 120.0;
constexpr int kLegAttempts = 200;

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

void RewardConfig::validate() const {
  require(alpha_o > 0.0, "reward.alpha_o must be > 0");
  require(beta_h > 0.0, "reward.beta_h must be > 0");
  require(tau > 0.0, "reward.tau must be > 0");
  require(eta > 0.0, "reward.eta must be > 0");
  require(std::isfinite(ho_margin_db), "reward.ho_margin_db must be finite");
}

std::vector<double> Scenario::tx_powers_dbm() const {
  std::vector<double> p;
  p.reserve(base_stations.size());
  for (const auto& bs : base_stations) p.push_back(bs.tx_power_dbm);
  return p;
}

void Scenario::validate() const {
  require(area_l_m > 0.0, "area.l_m must be > 0");
  require(area_w_m > 0.0, "area.w_m must be > 0");
  require(base_stations.size() >= 3, "base_stations needs at least 3 entries");
  for (std::size_t i = 0; i < base_stations.size(); ++i) {
    const auto& bs = base_stations[i];
    const std::string at = "base_stations[" + std::to_string(i) + "]";
    require(bs.id == static_cast<int>(i),
            at + ".id must equal its index (ids are 0..M-1, sorted)");
    require(bs.x >= 0.0 && bs.x <= area_l_m, at + ".x outside area");
    require(bs.y >= 0.0 && bs.y <= area_w_m, at + ".y outside area");
    require(bs.h_bs_m > 0.0, at + ".h_bs_m must be > 0");
    require(std::isfinite(bs.tx_power_dbm), at + ".tx_power_dbm must be finite");
  }
  channel.validate();
  reward.validate();
  require(uav.speed_mps > 0.0, "uav.speed_mps must be > 0");
  require(uav.dt_s > 0.0, "uav.dt_s must be > 0");
  require(uav.max_altitude_m > 0.0 && uav.max_altitude_m <= channel::kMaxAerialHeightM,
          "uav.max_altitude_m must be in (0, 100]");
}

Scenario default_scenario() {
  Scenario s;
  const double cx = s.area_l_m / 2.0;
  const double cy = s.area_w_m / 2.0;
  const double off = 600.0;
  s.base_stations = {
      {0, cx, cy, 25.0, 45.0},
      {1, cx - off, cy - off, 25.0, 45.0},
      {2, cx + off, cy - off, 25.0, 45.0},
      {3, cx - off, cy + off, 25.0, 45.0},
      {4, cx + off, cy + off, 25.0, 45.0},
  };
  return s;
}

std::string_view to_string(FlightPhase phase) {
  switch (phase) {
    case FlightPhase::Takeoff: return "takeoff";
    case FlightPhase::Cruise: return "cruise";
    case FlightPhase::Landing: return "landing";
  }
  return "cruise";
}

void FlightPath::validate(const Scenario& scenario) const {
  const std::string at = "path " + std::to_string(id);
  require(points.size() >= 2, at + ": needs at least 2 points");
  require(phases.empty() || phases.size() == points.size(),
          at + ": phases must be empty or one per point");
  const double max_step = scenario.step_length_m() + 1e-6;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    require(p.x >= 0.0 && p.x <= scenario.area_l_m && p.y >= 0.0 &&
                p.y <= scenario.area_w_m,
            at + ": point " + std::to_string(i) + " outside area");
    require(p.z >= 0.0 && p.z <= channel::kMaxAerialHeightM,
            at + ": point " + std::to_string(i) + " altitude outside [0, 100] m");
    if (i > 0)
      require(distance(points[i - 1], p) <= max_step,
              at + ": points " + std::to_string(i - 1) + "-" + std::to_string(i) +
                  " further apart than speed*dt");
  }
}

namespace {

struct Waypoint {
  Vec3 pos;
  FlightPhase phase;  // phase of the segment ending here
};

bool inside(const Scenario& s, double x, double y) {
  return x >= kEdgeMarginM && x <= s.area_l_m - kEdgeMarginM && y >= kEdgeMarginM &&
         y <= s.area_w_m - kEdgeMarginM;
}

// Resamples the polyline at fixed arc-length spacing.
FlightPath resample(int id, const std::vector<Waypoint>& wps, double step) {
  FlightPath path;
  path.id = id;
  path.points.push_back(wps.front().pos);
  path.phases.push_back(FlightPhase::Takeoff);

  double carry = 0.0;  // arc length already travelled past the last emitted point
  for (std::size_t i = 1; i < wps.size(); ++i) {
    const Vec3& a = wps[i - 1].pos;
    const Vec3& b = wps[i].pos;
    const double seg = distance(a, b);
    double s = step - carry;
    while (s <= seg + 1e-12) {
      const double u = s / seg;
      path.points.push_back({a.x + u * (b.x - a.x), a.y + u * (b.y - a.y),
                             a.z + u * (b.z - a.z)});
      path.phases.push_back(wps[i].phase);
      s += step;
    }
    carry = seg - (s - step);
  }
  if (distance(path.points.back(), wps.back().pos) > 1e-9) {
    path.points.push_back(wps.back().pos);
    path.phases.push_back(wps.back().phase);
  }
  return path;
}

}  // namespace

std::vector<FlightPath> generate_paths(const Scenario& scenario, int count,
                                       std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("path count must be >= 1");
  scenario.validate();
  const double cruise_max = std::min(scenario.uav.max_altitude_m, 30.0);
  const double inner_l = scenario.area_l_m - 2.0 * kEdgeMarginM;
  const double inner_w = scenario.area_w_m - 2.0 * kEdgeMarginM;
  const double needed = 2.0 * kClimbRatio * cruise_max + kMaxLegM;
  if (inner_l < needed || inner_w < needed)
    throw std::invalid_argument("scenario area too small to fit a flight path");
  if (cruise_max < kMinCruiseAltitudeM)
    throw std::invalid_argument("uav.max_altitude_m below the aerial model floor");

  constexpr double pi = std::numbers::pi;
  std::vector<FlightPath> paths;
  for (int p = 1; p <= count; ++p) {
    Rng rng(stream_seed(seed, Stream::Paths, {static_cast<std::uint64_t>(p)}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    for (int attempt = 0;; ++attempt) {
      if (attempt == kLegAttempts)
        throw std::runtime_error("could not fit flight path " + std::to_string(p));
      const double alt = uniform(kMinCruiseAltitudeM, cruise_max);
      const double climb = kClimbRatio * alt;
      std::vector<Waypoint> wps;
      double x = uniform(kEdgeMarginM, scenario.area_l_m - kEdgeMarginM);
      double y = uniform(kEdgeMarginM, scenario.area_w_m - kEdgeMarginM);
      double heading = uniform(-pi, pi);
      wps.push_back({{x, y, 0.0}, FlightPhase::Takeoff});

      auto try_leg = [&](double len, double z, FlightPhase phase, double turn_lo,
                         double turn_hi) {
        for (int k = 0; k < kLegAttempts; ++k) {
          const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
          const double h = heading + sign * uniform(turn_lo, turn_hi);
          const double nx = x + len * std::cos(h);
          const double ny = y + len * std::sin(h);
          if (inside(scenario, nx, ny)) {
            x = nx;
            y = ny;
            heading = h;
            wps.push_back({{x, y, z}, phase});
            return true;
          }
        }
        return false;
      };

      bool ok = try_leg(climb, alt, FlightPhase::Takeoff, 0.0, pi);
      const int turns = std::uniform_int_distribution<int>(3, 6)(rng);
      // First cruise leg continues the climb heading; each later leg is a turn.
      ok = ok && try_leg(uniform(kMinLegM, kMaxLegM), alt, FlightPhase::Cruise, 0.0, 0.0);
      for (int t = 0; ok && t < turns; ++t)
        ok = try_leg(uniform(kMinLegM, kMaxLegM), alt, FlightPhase::Cruise, pi / 6.0,
                     2.0 * pi / 3.0);
      ok = ok && try_leg(climb, 0.0, FlightPhase::Landing, 0.0, pi / 6.0);
      if (!ok) continue;

      FlightPath path = resample(p, wps, scenario.step_length_m());
      path.validate(scenario);
      paths.push_back(std::move(path));
      break;
    }
  }
  return paths;
}

}  // namespace uavho

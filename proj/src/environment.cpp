#include "uavho/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace uavho {

namespace {

std::vector<channel::LinkGeometry> geometries(const Vec3& pos, const Scenario& s) {
  std::vector<channel::LinkGeometry> g;
  g.reserve(s.bs_count());
  for (const auto& bs : s.base_stations)
    g.push_back(channel::LinkGeometry::between(pos.x, pos.y, pos.z, bs.x, bs.y, bs.h_bs_m));
  return g;
}

std::vector<double> sinrs_with(const Vec3& pos, const Scenario& s,
                               const channel::ChannelParams& params, Rng& rng) {
  const auto geoms = geometries(pos, s);
  const auto powers = s.tx_powers_dbm();
  const auto links = channel::evaluate_links(geoms, powers, params, rng);
  std::vector<double> out(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) out[i] = links[i].sinr_db;
  return out;
}

double to_unit_interval(double v, double lo, double hi) {
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

void require_live(const EnvState& env) {
  if (env.done) throw std::logic_error("episode already finished");
}

}  // namespace

std::vector<double> sample_sinrs(const Vec3& pos, const Scenario& scenario, Rng& rng) {
  return sinrs_with(pos, scenario, scenario.channel, rng);
}

std::vector<double> expected_sinrs(const Vec3& pos, const Scenario& scenario) {
  auto params = scenario.channel;
  params.mode = channel::ChannelMode::Expected;
  Rng unused(0);
  return sinrs_with(pos, scenario, params, unused);
}

int strongest(std::span<const double> sinr_db) {
  if (sinr_db.empty()) throw std::invalid_argument("empty SINR list");
  // max_element keeps the first maximum, i.e. the lower id on ties.
  return static_cast<int>(std::max_element(sinr_db.begin(), sinr_db.end()) -
                          sinr_db.begin());
}

CandidateSet build_candidates(int serving, std::span<const double> sinr_db) {
  const int m = static_cast<int>(sinr_db.size());
  if (m < 3) throw std::invalid_argument("candidate set needs at least 3 base stations");
  if (serving < 0 || serving >= m) throw std::out_of_range("serving BS id out of range");

  std::vector<int> others;
  others.reserve(m - 1);
  for (int i = 0; i < m; ++i)
    if (i != serving) others.push_back(i);
  std::stable_sort(others.begin(), others.end(),
                   [&](int a, int b) { return sinr_db[a] > sinr_db[b]; });

  CandidateSet c;
  c.ids = {serving, others[0], others[1]};
  for (std::size_t k = 0; k < 3; ++k) c.sinrs_db[k] = sinr_db[c.ids[k]];
  return c;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double compute_reward(int prev_serving, int new_serving, double sinr_new_db,
                      double sinr_prev_bs_db, const RewardConfig& cfg, int outage) {
  double ho_soft = 0.0;
  if (new_serving != prev_serving)
    ho_soft = cfg.eta * sigmoid((sinr_new_db - sinr_prev_bs_db - cfg.ho_margin_db) / cfg.tau);
  return -cfg.alpha_o * outage - cfg.beta_h * ho_soft;
}

EnvState reset(const Scenario& scenario, const FlightPath& path,
               std::uint64_t episode_seed) {
  if (path.points.empty()) throw std::invalid_argument("empty flight path");
  if (path.points.size() < 2) throw std::invalid_argument("flight path needs >= 2 points");
  EnvState env;
  env.rng.seed(episode_seed);
  env.sinr_db = sample_sinrs(path.points.front(), scenario, env.rng);
  env.serving_bs = strongest(env.sinr_db);
  env.candidates = build_candidates(env.serving_bs, env.sinr_db);
  return env;
}

StateVector observe(const EnvState& env, const Scenario& scenario,
                    const FlightPath& path) {
  require_live(env);
  const Vec3& p = path.points[env.step];
  const Vec3& next = env.step + 1 < path.points.size() ? path.points[env.step + 1] : p;
  const double m = static_cast<double>(scenario.bs_count());

  StateVector s{};
  std::size_t i = 0;
  for (const Vec3* q : {&p, &next}) {
    s[i++] = to_unit_interval(q->x, 0.0, scenario.area_l_m);
    s[i++] = to_unit_interval(q->y, 0.0, scenario.area_w_m);
    s[i++] = to_unit_interval(q->z, 0.0, kAltitudeScaleM);
  }
  for (double g : env.candidates.sinrs_db)
    s[i++] = to_unit_interval(std::clamp(g, kSinrClipLowDb, kSinrClipHighDb),
                              kSinrClipLowDb, kSinrClipHighDb);
  for (int id : env.candidates.ids) s[i++] = to_unit_interval((id + 1) / m, 0.0, 1.0);
  // The serving BS always occupies candidate slot 0.
  s[i++] = -1.0;
  return s;
}

StepOutcome apply_serving(EnvState& env, int new_serving, const Scenario& scenario,
                          const FlightPath& path) {
  require_live(env);
  if (new_serving < 0 || new_serving >= static_cast<int>(scenario.bs_count()))
    throw std::out_of_range("serving BS id out of range: " + std::to_string(new_serving));

  const int prev = env.serving_bs;
  env.step += 1;
  env.sinr_db = sample_sinrs(path.points[env.step], scenario, env.rng);
  env.serving_bs = new_serving;
  env.candidates = build_candidates(new_serving, env.sinr_db);
  env.done = env.step + 1 >= path.points.size();

  StepOutcome out;
  out.serving_bs = new_serving;
  out.serving_sinr_db = env.sinr_db[new_serving];
  out.handover = new_serving != prev ? 1 : 0;
  out.outage = channel::outage_indicator(out.serving_sinr_db,
                                         scenario.channel.sinr_threshold_db);
  out.reward = compute_reward(prev, new_serving, out.serving_sinr_db, env.sinr_db[prev],
                              scenario.reward, out.outage);
  out.done = env.done;

  env.handovers += out.handover;
  env.outages += out.outage;
  env.cum_reward += out.reward;

  if (env.done) {
    // Terminal observation: built as if live so transitions carry a full vector.
    env.done = false;
    out.next_state = observe(env, scenario, path);
    env.done = true;
  } else {
    out.next_state = observe(env, scenario, path);
  }
  return out;
}

StepOutcome apply_action(EnvState& env, int action, const Scenario& scenario,
                         const FlightPath& path) {
  if (action < 0 || action >= static_cast<int>(kActionCount))
    throw std::out_of_range("invalid action index " + std::to_string(action));
  return apply_serving(env, env.candidates.ids[action], scenario, path);
}

}  // namespace uavho

#include "uavho/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uavho::channel {

namespace {

double clamp_aerial_height(double h_ut_m) {
  return std::max(h_ut_m, kMinAerialHeightM);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::domain_error(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string_view to_string(ChannelMode mode) {
  return mode == ChannelMode::Expected ? "expected" : "sampled_los";
}

ChannelMode channel_mode_from_string(std::string_view s) {
  if (s == "expected") return ChannelMode::Expected;
  if (s == "sampled_los") return ChannelMode::SampledLoS;
  throw std::invalid_argument("unknown channel mode '" + std::string(s) +
                              "' (expected|sampled_los)");
}

void ChannelParams::validate() const {
  if (!(carrier_freq_ghz > 0.0))
    throw std::invalid_argument("channel.carrier_freq_ghz must be > 0");
  if (!std::isfinite(noise_power_dbm))
    throw std::invalid_argument("channel.noise_power_dbm must be finite");
  if (std::isnan(sinr_threshold_db))
    throw std::invalid_argument("channel.sinr_threshold_db must not be NaN");
}

LinkGeometry LinkGeometry::between(double x, double y, double z, double bx,
                                   double by, double h_bs) {
  LinkGeometry g;
  g.d2d_m = std::hypot(x - bx, y - by);
  g.d3d_m = std::hypot(g.d2d_m, z - h_bs);
  g.h_ut_m = z;
  g.h_bs_m = h_bs;
  return g;
}

void LinkGeometry::validate() const {
  if (!(d2d_m >= 0.0)) throw std::domain_error("d2d must be >= 0");
  if (!(d3d_m >= d2d_m)) throw std::domain_error("d3d must be >= d2d");
  require_positive(h_bs_m, "BS height");
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double breakpoint_distance(double h_bs_m) {
  require_positive(h_bs_m, "BS height");
  return std::max(294.05 * std::log10(h_bs_m) - 432.94, 18.0);
}

double los_probability(const LinkGeometry& geom) {
  if (!(geom.d2d_m >= 0.0)) throw std::domain_error("d2d must be >= 0");
  const double h_ut = clamp_aerial_height(geom.h_ut_m);
  if (h_ut <= 0.95) throw std::domain_error("UAV height outside LoS model range");

  const double d1 = breakpoint_distance(geom.h_bs_m);
  if (geom.d2d_m <= d1) return 1.0;
  const double p1 = 233.98 * std::log10(h_ut - 0.95);
  const double ratio = d1 / geom.d2d_m;
  return ratio + (1.0 - ratio) * std::exp(-geom.d2d_m / p1);
}

double free_space_path_loss(double d3d_m, double f_ghz) {
  require_positive(d3d_m, "3D distance");
  require_positive(f_ghz, "frequency");
  // -147.55 dB is 20 log10(4 pi / c) for f in Hz.
  return 20.0 * std::log10(d3d_m) + 20.0 * std::log10(f_ghz * 1e9) - 147.55;
}

double path_loss_los(const LinkGeometry& geom, double f_ghz) {
  require_positive(geom.d3d_m, "3D distance");
  const double h_ut = clamp_aerial_height(geom.h_ut_m);
  const double pl = (22.25 - 0.5 * std::log10(h_ut)) * std::log10(geom.d3d_m) +
                    30.9 + 20.0 * std::log10(f_ghz);
  return std::max(pl, free_space_path_loss(geom.d3d_m, f_ghz));
}

double path_loss_nlos(const LinkGeometry& geom, double f_ghz) {
  require_positive(geom.d3d_m, "3D distance");
  const double h_ut = clamp_aerial_height(geom.h_ut_m);
  const double pl = (43.2 - 7.6 * std::log10(h_ut)) * std::log10(geom.d3d_m) +
                    32.4 + 20.0 * std::log10(f_ghz);
  return std::max(pl, path_loss_los(geom, f_ghz));
}

double effective_path_loss(const LinkGeometry& geom, const ChannelParams& params,
                           Rng& rng) {
  const double p_los = los_probability(geom);
  const double los = path_loss_los(geom, params.carrier_freq_ghz);
  const double nlos = path_loss_nlos(geom, params.carrier_freq_ghz);
  if (params.mode == ChannelMode::Expected) return p_los * los + (1.0 - p_los) * nlos;
  std::bernoulli_distribution is_los(p_los);
  return is_los(rng) ? los : nlos;
}

double channel_gain(double pl_db) { return std::pow(10.0, -pl_db / 10.0); }

double sinr(std::size_t serving_index, std::span<const double> gains,
            std::span<const double> tx_powers_mw, double noise_mw) {
  if (gains.empty()) throw std::domain_error("SINR needs at least one base station");
  if (gains.size() != tx_powers_mw.size())
    throw std::invalid_argument("gains and tx powers differ in length");
  if (serving_index >= gains.size())
    throw std::out_of_range("serving index out of range");

  const double signal = gains[serving_index] * tx_powers_mw[serving_index];
  double interference = 0.0;
  for (std::size_t n = 0; n < gains.size(); ++n)
    if (n != serving_index) interference += gains[n] * tx_powers_mw[n];
  return 10.0 * std::log10(signal / (noise_mw + interference));
}

int outage_indicator(double sinr_db, double threshold_db) {
  return sinr_db < threshold_db ? 1 : 0;
}

std::vector<LinkBudget> evaluate_links(std::span<const LinkGeometry> geoms,
                                       std::span<const double> tx_powers_dbm,
                                       const ChannelParams& params, Rng& rng) {
  if (geoms.size() != tx_powers_dbm.size())
    throw std::invalid_argument("geometry and tx power lists differ in length");
  if (geoms.empty()) throw std::domain_error("no base stations to evaluate");

  std::vector<LinkBudget> out(geoms.size());
  std::vector<double> gains(geoms.size());
  std::vector<double> powers_mw(geoms.size());
  for (std::size_t i = 0; i < geoms.size(); ++i) {
    out[i].p_los = los_probability(geoms[i]);
    out[i].pl_db = effective_path_loss(geoms[i], params, rng);
    out[i].gain_linear = channel_gain(out[i].pl_db);
    gains[i] = out[i].gain_linear;
    powers_mw[i] = dbm_to_mw(tx_powers_dbm[i]);
  }
  const double noise_mw = dbm_to_mw(params.noise_power_dbm);
  for (std::size_t i = 0; i < geoms.size(); ++i)
    out[i].sinr_db = sinr(i, gains, powers_mw, noise_mw);
  return out;
}

}  // namespace uavho::channel

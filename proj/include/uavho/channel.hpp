#pragma once

// 3GPP UMa-AV aerial channel: LoS probability, LoS/NLoS/free-space path loss,
// effective path loss, linear gain, SINR and outage indication.
//
// Frequencies are passed in GHz. Heights below the aerial model's validity
// floor are clamped to kMinAerialHeightM before the height-dependent terms
// are evaluated. Powers are in dBm at the API boundary and linear mW inside
// the SINR computation.

#include <span>
#include <string_view>
#include <vector>

#include "uavho/rng.hpp"

namespace uavho::channel {

inline constexpr double kMinAerialHeightM = 22.5;
inline constexpr double kMaxAerialHeightM = 100.0;

enum class ChannelMode { Expected, SampledLoS };

std::string_view to_string(ChannelMode mode);
ChannelMode channel_mode_from_string(std::string_view s);

struct ChannelParams {
  double carrier_freq_ghz = 2.1;
  double noise_power_dbm = -100.0;
  double sinr_threshold_db = 0.0;
  ChannelMode mode = ChannelMode::Expected;

  void validate() const;
};

struct LinkGeometry {
  double d2d_m = 0.0;
  double d3d_m = 0.0;
  double h_ut_m = 0.0;
  double h_bs_m = 0.0;

  /// Builds the geometry between a UAV at (x, y, z) and a BS at (bx, by)
  /// with antenna height h_bs.
  static LinkGeometry between(double x, double y, double z, double bx, double by,
                              double h_bs);
  void validate() const;
};

struct LinkBudget {
  double p_los = 0.0;
  double pl_db = 0.0;
  double gain_linear = 0.0;
  double sinr_db = 0.0;
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// d1 = max(294.05 log10(h_bs) - 432.94, 18).
double breakpoint_distance(double h_bs_m);

double los_probability(const LinkGeometry& geom);

double free_space_path_loss(double d3d_m, double f_ghz);
double path_loss_los(const LinkGeometry& geom, double f_ghz);
double path_loss_nlos(const LinkGeometry& geom, double f_ghz);

/// Expected mode: P_LOS-weighted mix of the LoS and NLoS laws.
/// SampledLoS mode: one Bernoulli(P_LOS) draw from `rng` selects a law.
double effective_path_loss(const LinkGeometry& geom, const ChannelParams& params,
                           Rng& rng);

double channel_gain(double pl_db);

/// SINR in dB of the serving link against the sum of all other links plus
/// noise. `gains` and `tx_powers_mw` are indexed by BS position.
double sinr(std::size_t serving_index, std::span<const double> gains,
            std::span<const double> tx_powers_mw, double noise_mw);

int outage_indicator(double sinr_db, double threshold_db);

/// Evaluates every link to the UAV and fills each BS's SINR as if it were the
/// serving cell. In SampledLoS mode draws one LoS state per BS, in order.
std::vector<LinkBudget> evaluate_links(std::span<const LinkGeometry> geoms,
                                       std::span<const double> tx_powers_dbm,
                                       const ChannelParams& params, Rng& rng);

}  // namespace uavho::channel

#pragma once

// Stand-alone evaluation of the UMa-AV link equations for cross-checking the
// library. Written straight from the formulas in long double; shares no code
// with src/.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using ld = long double;

inline ld lg(ld v) { return std::log10(v); }

inline ld clamp_h(ld h) { return std::max<ld>(h, 22.5L); }

inline ld d1(ld h_bs) { return std::max<ld>(294.05L * lg(h_bs) - 432.94L, 18.0L); }

inline ld p1(ld h_ut) { return 233.98L * lg(clamp_h(h_ut) - 0.95L); }

inline ld p_los(ld d2d, ld h_ut, ld h_bs) {
  const ld b = d1(h_bs);
  if (d2d <= b) return 1.0L;
  return b / d2d + (1.0L - b / d2d) * std::exp(-d2d / p1(h_ut));
}

/// Free space with the carrier in Hz.
inline ld pl_free(ld d3d, ld f_ghz) {
  return 20.0L * lg(d3d) + 20.0L * lg(f_ghz * 1.0e9L) - 147.55L;
}

inline ld pl_los(ld d3d, ld h_ut, ld f_ghz) {
  const ld h = clamp_h(h_ut);
  const ld v = (22.25L - 0.5L * lg(h)) * lg(d3d) + 30.9L + 20.0L * lg(f_ghz);
  return std::max(v, pl_free(d3d, f_ghz));
}

inline ld pl_nlos(ld d3d, ld h_ut, ld f_ghz) {
  const ld h = clamp_h(h_ut);
  const ld v = (43.2L - 7.6L * lg(h)) * lg(d3d) + 32.4L + 20.0L * lg(f_ghz);
  return std::max(v, pl_los(d3d, h_ut, f_ghz));
}

inline ld pl_expected(ld d2d, ld d3d, ld h_ut, ld h_bs, ld f_ghz) {
  const ld p = p_los(d2d, h_ut, h_bs);
  return p * pl_los(d3d, h_ut, f_ghz) + (1.0L - p) * pl_nlos(d3d, h_ut, f_ghz);
}

inline ld gain(ld pl_db) { return std::pow(10.0L, -pl_db / 10.0L); }

/// gamma_k = h_k P_k / (N0 + sum_{n != k} h_n P_n), powers in dBm, result in dB.
inline ld sinr_db(std::size_t k, const std::vector<ld>& gains, const std::vector<ld>& tx_dbm,
                  ld noise_dbm) {
  auto mw = [](ld dbm) { return std::pow(10.0L, dbm / 10.0L); };
  ld interference = mw(noise_dbm);
  for (std::size_t n = 0; n < gains.size(); ++n)
    if (n != k) interference += gains[n] * mw(tx_dbm[n]);
  return 10.0L * lg(gains[k] * mw(tx_dbm[k]) / interference);
}

}  // namespace oracle

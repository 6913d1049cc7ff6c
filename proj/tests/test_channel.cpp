#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracle/channel_oracle.hpp"
#include "uavho/channel.hpp"

using namespace uavho;
using namespace uavho::channel;

namespace {

LinkGeometry geom(double d2d, double h_ut, double h_bs) {
  return LinkGeometry::between(d2d, 0.0, h_ut, 0.0, 0.0, h_bs);
}

}  // namespace

TEST_CASE("breakpoint distance") {
  CHECK(breakpoint_distance(35.0) == doctest::Approx(21.0932084412).epsilon(1e-10));
  CHECK(breakpoint_distance(25.0) == 18.0);
  CHECK(breakpoint_distance(10.0) == 18.0);
}

TEST_CASE("line of sight probability") {
  CHECK(los_probability(geom(10.0, 30.0, 25.0)) == 1.0);
  CHECK(los_probability(geom(18.0, 30.0, 25.0)) == 1.0);
  CHECK(los_probability(geom(500.0, 30.0, 25.0)) ==
        doctest::Approx(0.2597623528).epsilon(1e-9));
  double prev = 1.0;
  for (double d = 20.0; d < 3000.0; d += 37.0) {
    const double p = los_probability(geom(d, 40.0, 25.0));
    CHECK(p <= prev);
    CHECK(p > 0.0);
    prev = p;
  }
}

TEST_CASE("path loss laws") {
  const auto g = geom(100.0, 30.0, 25.0);
  CHECK(free_space_path_loss(100.0, 2.1) == doctest::Approx(78.8943858947).epsilon(1e-10));
  CHECK(path_loss_los(geom(100.0, 30.0, 30.0), 2.1) ==
        doctest::Approx(80.3672646400).epsilon(1e-10));
  CHECK(path_loss_nlos(geom(100.0, 30.0, 30.0), 2.1) ==
        doctest::Approx(102.7921428229).epsilon(1e-10));
  CHECK(path_loss_nlos(g, 2.1) >= path_loss_los(g, 2.1));
  CHECK(path_loss_los(g, 2.1) >= free_space_path_loss(g.d3d_m, 2.1));
  // very close to the mast the free-space floor binds
  const auto near = geom(1.0, 25.0, 25.0);
  CHECK(path_loss_los(near, 2.1) == free_space_path_loss(near.d3d_m, 2.1));
}

TEST_CASE("heights below the aerial floor are clamped") {
  CHECK(path_loss_los(geom(300.0, 10.0, 25.0), 2.1) ==
        path_loss_los(LinkGeometry{300.0, geom(300.0, 10.0, 25.0).d3d_m, 22.5, 25.0}, 2.1));
  CHECK(los_probability(geom(300.0, 5.0, 25.0)) == los_probability(geom(300.0, 22.5, 25.0)));
}

TEST_CASE("effective path loss modes") {
  ChannelParams p;
  Rng rng(3);
  const auto g = geom(400.0, 30.0, 25.0);
  const double los = path_loss_los(g, 2.1);
  const double nlos = path_loss_nlos(g, 2.1);
  const double pl = los_probability(g);
  CHECK(effective_path_loss(g, p, rng) == doctest::Approx(pl * los + (1 - pl) * nlos));

  p.mode = ChannelMode::SampledLoS;
  int los_count = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = effective_path_loss(g, p, rng);
    CHECK((v == los || v == nlos));
    los_count += v == los;
  }
  CHECK(static_cast<double>(los_count) / n == doctest::Approx(pl).epsilon(0.05));
}

TEST_CASE("gain, sinr and outage") {
  CHECK(channel_gain(96.96) == doctest::Approx(2.013724e-10).epsilon(1e-6));
  CHECK(channel_gain(0.0) == 1.0);
  const std::vector<double> gains{channel_gain(80.0)};
  const std::vector<double> tx{dbm_to_mw(45.0)};
  CHECK(sinr(0, gains, tx, dbm_to_mw(-100.0)) == doctest::Approx(65.0).epsilon(1e-12));
  CHECK(mw_to_dbm(dbm_to_mw(17.5)) == doctest::Approx(17.5));

  CHECK(outage_indicator(-0.001, 0.0) == 1);
  CHECK(outage_indicator(0.0, 0.0) == 0);
  CHECK(outage_indicator(5.0, -std::numeric_limits<double>::infinity()) == 0);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(breakpoint_distance(0.0), std::domain_error);
  CHECK_THROWS_AS(free_space_path_loss(-1.0, 2.1), std::domain_error);
  CHECK_THROWS_AS(path_loss_los(LinkGeometry{10.0, 0.0, 30.0, 25.0}, 2.1), std::domain_error);
  CHECK_THROWS_AS(channel_mode_from_string("rayleigh"), std::invalid_argument);
  ChannelParams p;
  p.carrier_freq_ghz = 0.0;
  CHECK_THROWS(p.validate());
  Rng rng(1);
  CHECK_THROWS_AS(evaluate_links({}, {}, ChannelParams{}, rng), std::domain_error);
}

TEST_CASE("links agree with the stand-alone equations") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pos(0.0, 2000.0), alt(0.0, 100.0),
      mast(10.0, 40.0), tx(30.0, 46.0);
  ChannelParams params;
  for (int trial = 0; trial < 200; ++trial) {
    const double x = pos(gen), y = pos(gen), z = alt(gen);
    std::vector<LinkGeometry> geoms;
    std::vector<double> tx_dbm;
    std::vector<oracle::ld> og, otx;
    for (int b = 0; b < 5; ++b) {
      const double bx = pos(gen), by = pos(gen), h = mast(gen), p = tx(gen);
      geoms.push_back(LinkGeometry::between(x, y, z, bx, by, h));
      tx_dbm.push_back(p);
      const auto& g = geoms.back();
      og.push_back(oracle::gain(oracle::pl_expected(g.d2d_m, g.d3d_m, z, h, 2.1)));
      otx.push_back(p);
    }
    Rng rng(1);
    const auto links = evaluate_links(geoms, tx_dbm, params, rng);
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto& g = geoms[k];
      CHECK(std::abs(links[k].pl_db -
                     double(oracle::pl_expected(g.d2d_m, g.d3d_m, z, g.h_bs_m, 2.1))) < 1e-9);
      CHECK(std::abs(links[k].sinr_db - double(oracle::sinr_db(k, og, otx, -100.0L))) < 1e-9);
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oracle/channel_oracle.hpp"
#include "uavho/baselines.hpp"
#include "uavho/eval.hpp"

using namespace uavho;

TEST_CASE("greedy margin rule") {
  CHECK(greedy_decide(std::vector<double>{10.0, 14.0, 2.0}, 0, 3.0) == 1);
  CHECK(greedy_decide(std::vector<double>{10.0, 12.9, 2.0}, 0, 3.0) == 0);
  CHECK(greedy_decide(std::vector<double>{10.0, 4.0}, 0, 0.0) == 0);
  CHECK(greedy_decide(std::vector<double>{1.0, 9.0, 9.0}, 0, 3.0) == 1);
  CHECK(greedy_decide(std::vector<double>{1.0, 90.0}, 0,
                      std::numeric_limits<double>::infinity()) == 0);
}

TEST_CASE("hysteresis needs the full time-to-trigger window") {
  const std::vector<double> better{0.0, 5.0, -10.0};
  const std::vector<double> worse{0.0, 2.0, -10.0};
  HysteresisState st;
  for (int i = 0; i < 19; ++i) CHECK(hysteresis_decide(better, st, 0, 3.0, 20) == 0);
  CHECK(hysteresis_decide(better, st, 0, 3.0, 20) == 1);
  for (int c : st.counters) CHECK(c == 0);

  HysteresisState st2;
  for (int i = 0; i < 19; ++i) hysteresis_decide(better, st2, 0, 3.0, 20);
  CHECK(st2.counters[1] == 19);
  CHECK(hysteresis_decide(worse, st2, 0, 3.0, 20) == 0);
  CHECK(st2.counters[1] == 0);
  for (int i = 0; i < 19; ++i) CHECK(hysteresis_decide(better, st2, 0, 3.0, 20) == 0);
  CHECK(hysteresis_decide(better, st2, 0, 3.0, 20) == 1);
}

TEST_CASE("hysteresis picks the strongest qualified BS") {
  HysteresisState st;
  const std::vector<double> s{0.0, 5.0, 8.0, 8.0};
  for (int i = 0; i < 2; ++i) hysteresis_decide(s, st, 0, 3.0, 3);
  CHECK(hysteresis_decide(s, st, 0, 3.0, 3) == 2);
  for (int c : st.counters) CHECK(c <= 3);
}

TEST_CASE("mop selection rules") {
  const std::vector<double> current{5.0, 9.0, 1.0};
  // BS 0 is outage-free, BS 1 is out twice in five steps
  std::vector<std::vector<double>> pred(5, {2.0, 3.0, -1.0});
  pred[1][1] = -2.0;
  pred[3][1] = -4.0;
  CHECK(mop_select(current, pred, 0.0) == 0);
  // all outage-free: highest current SINR wins
  CHECK(mop_select(current, std::vector<std::vector<double>>(5, {2.0, 3.0, 1.0}), 0.0) == 1);
  // equal current SINR: lower id wins
  CHECK(mop_select(std::vector<double>{4.0, 4.0}, {{1.0, 1.0}}, 0.0) == 0);
}

TEST_CASE("mop matches an exhaustive scan of serving choices") {
  const Scenario sc = default_scenario();
  const FlightPath path = generate_paths(sc, 1, 21).front();
  const int horizon = 5;
  for (std::size_t step = 0; step + 1 < path.length(); step += 13) {
    const std::vector<double> now = expected_sinrs(path.points[step], sc);
    for (double th : {-5.0, 0.0, 5.0}) {
      int best = -1, best_out = 0;
      for (std::size_t k = 0; k < sc.bs_count(); ++k) {
        int out = 0;
        for (std::size_t t = step + 1; t <= step + horizon && t < path.length(); ++t) {
          const Vec3& p = path.points[t];
          std::vector<oracle::ld> gains, tx;
          for (const auto& b : sc.base_stations) {
            const double d2 = std::hypot(p.x - b.x, p.y - b.y);
            const double d3 = std::hypot(d2, p.z - b.h_bs_m);
            gains.push_back(oracle::gain(oracle::pl_expected(d2, d3, p.z, b.h_bs_m, 2.1)));
            tx.push_back(b.tx_power_dbm);
          }
          out += oracle::sinr_db(k, gains, tx, -100.0L) < th;
        }
        if (best < 0 || out < best_out || (out == best_out && now[k] > now[best])) {
          best = static_cast<int>(k);
          best_out = out;
        }
      }
      CHECK(mop_decide(sc, path, step, now, horizon, th) == best);
    }
  }
}

TEST_CASE("policies degenerate to zero handovers") {
  const Scenario sc = default_scenario();
  const auto paths = generate_paths(sc, 3, 5);
  GreedyPolicy greedy(std::numeric_limits<double>::infinity());
  HysteresisPolicy hyst(1e9, 20);
  KeepPolicy keep;
  for (const auto& p : paths) {
    CHECK(run_episode(greedy, sc, p, 0, 1).handovers == 0);
    CHECK(run_episode(hyst, sc, p, 0, 1).handovers == 0);
    CHECK(run_episode(keep, sc, p, 0, 1).handovers == 0);
  }
}

TEST_CASE("hysteresis never hands over more than greedy") {
  Scenario sc = default_scenario();
  const auto paths = generate_paths(sc, 4, 8);
  for (auto mode : {channel::ChannelMode::Expected, channel::ChannelMode::SampledLoS}) {
    sc.channel.mode = mode;
    for (const auto& p : paths)
      for (int e = 0; e < 3; ++e) {
        auto g = make_baseline("greedy", {});
        auto h = make_baseline("hysteresis", {});
        CHECK(run_episode(*h, sc, p, e, 100 + e).handovers <=
              run_episode(*g, sc, p, e, 100 + e).handovers);
      }
  }
}

TEST_CASE("baseline factory") {
  CHECK(make_baseline("mop", {})->name() == "mop");
  CHECK_THROWS(make_baseline("random", {}));
  BaselineConfig bad;
  bad.ttt_steps = 0;
  CHECK_THROWS(make_baseline("greedy", bad));
}

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "uavho/rng.hpp"
#include "uavho/scenario.hpp"

using namespace uavho;

TEST_CASE("default scenario") {
  const Scenario s = default_scenario();
  CHECK(s.bs_count() == 5);
  CHECK(s.area_l_m == 2000.0);
  CHECK(s.area_w_m == 2000.0);
  CHECK(s.step_length_m() == doctest::Approx(1.0));
  CHECK_NOTHROW(s.validate());
  for (std::size_t i = 0; i < s.bs_count(); ++i) CHECK(s.base_stations[i].id == int(i));
}

TEST_CASE("scenario validation names the field") {
  Scenario s = default_scenario();
  s.base_stations[2].x = -5.0;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("base_stations[2].x"));
  s = default_scenario();
  s.base_stations[1].id = 7;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("base_stations[1]"));
  s = default_scenario();
  s.base_stations.resize(2);
  CHECK_THROWS(s.validate());
  s = default_scenario();
  s.reward.tau = 0.0;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("reward.tau"));
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(stream_seed(5, Stream::Channel, {1}) != stream_seed(5, Stream::Replay, {1}));
  CHECK(stream_seed(5, Stream::Init) != stream_seed(6, Stream::Init));
}

TEST_CASE("generated paths are valid and reproducible") {
  const Scenario s = default_scenario();
  const auto a = generate_paths(s, 10, 42);
  const auto b = generate_paths(s, 10, 42);
  const auto c = generate_paths(s, 10, 43);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == int(i) + 1);
    CHECK_NOTHROW(a[i].validate(s));
    CHECK(a[i].points == b[i].points);
    CHECK(a[i].phases.size() == a[i].points.size());
    CHECK(a[i].points.front().z == 0.0);
    CHECK(a[i].points.back().z == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(a[i].phases.front() == FlightPhase::Takeoff);
    CHECK(a[i].phases.back() == FlightPhase::Landing);
    double cruise_max = 0.0;
    for (std::size_t k = 0; k < a[i].points.size(); ++k)
      if (a[i].phases[k] == FlightPhase::Cruise) cruise_max = std::max(cruise_max, a[i].points[k].z);
    CHECK(cruise_max >= 22.5);
    CHECK(cruise_max <= s.uav.max_altitude_m + 1e-9);
  }
  CHECK(a[0].points != c[0].points);
}

TEST_CASE("path validation") {
  const Scenario s = default_scenario();
  FlightPath p;
  p.id = 1;
  p.points = {{10, 10, 0}};
  CHECK_THROWS(p.validate(s));
  p.points = {{10, 10, 0}, {10, 15, 0}};
  CHECK_THROWS(p.validate(s));  // jump longer than one step
  p.points = {{10, 10, 0}, {10, 10.5, 150}};
  CHECK_THROWS(p.validate(s));
  p.points = {{10, 10, 0}, {10, 11, 0}};
  CHECK_NOTHROW(p.validate(s));
}

TEST_CASE("an area too small for a path is rejected") {
  Scenario s = default_scenario();
  s.area_l_m = 150.0;
  s.area_w_m = 150.0;
  for (auto& b : s.base_stations) b.x = b.y = 75.0;
  CHECK_THROWS(generate_paths(s, 1, 1));
}

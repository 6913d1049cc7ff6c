#pragma once

#include "uavho/scenario.hpp"

namespace testutil {

/// Straight cruise at 30 m passing between two base stations.
inline uavho::FlightPath straight_path(int id, int points, double y = 1000.0) {
  uavho::FlightPath p;
  p.id = id;
  for (int i = 0; i < points; ++i) p.points.push_back({300.0 + i * 1.0, y, 30.0});
  return p;
}

}  // namespace testutil

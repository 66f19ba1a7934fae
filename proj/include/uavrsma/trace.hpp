#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "uavrsma/geometry.hpp"

namespace uavrsma {

struct TraceEntry {
  int iteration = 0;
  double wsr_bps_hz = 0.0;
  Position3D uav;
  Eigen::VectorXd user_rates;  // bits/s/Hz, overall per user
  std::string status;          // inner-solver status for this iteration
  double wall_clock_s = 0.0;
};

struct RunTrace {
  std::vector<TraceEntry> entries;

  double final_wsr() const {
    return entries.empty() ? 0.0 : entries.back().wsr_bps_hz;
  }
};

}  // namespace uavrsma

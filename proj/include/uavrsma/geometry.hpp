#pragma once

#include <cmath>
#include <stdexcept>

namespace uavrsma {

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (d <= 0.0) {
    throw std::domain_error("degenerate geometry: coincident positions");
  }
  return d;
}

// Elevation of the UAV as seen from the user, in [-pi/2, pi/2].
inline double elevation_angle(const Position3D& uav, const Position3D& user) {
  const double d = distance(uav, user);
  double s = (uav.z - user.z) / d;
  if (s > 1.0) s = 1.0;
  if (s < -1.0) s = -1.0;
  return std::asin(s);
}

}  // namespace uavrsma

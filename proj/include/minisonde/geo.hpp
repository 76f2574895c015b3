#pragma once

#include <cmath>
#include <numbers>

namespace minisonde::geo {

inline constexpr double kEarthRadiusM = 6371000.0;

/// Local tangent-plane scale factors.
inline double meters_per_deg_lat() { return kEarthRadiusM * std::numbers::pi / 180.0; }

inline double meters_per_deg_lon(double lat_deg) {
  return meters_per_deg_lat() * std::cos(lat_deg * std::numbers::pi / 180.0);
}

struct PlanarOffset {
  double east_m;
  double north_m;
  double norm() const { return std::hypot(east_m, north_m); }
};

/// Offset from (lat0, lon0) to (lat1, lon1) on the tangent plane at the mean latitude.
inline PlanarOffset planar_offset(double lat0, double lon0, double lat1, double lon1) {
  const double mid = 0.5 * (lat0 + lat1);
  return {(lon1 - lon0) * meters_per_deg_lon(mid), (lat1 - lat0) * meters_per_deg_lat()};
}

}  // namespace minisonde::geo

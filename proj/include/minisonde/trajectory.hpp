#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "minisonde/forecast_grid.hpp"
#include "minisonde/geo.hpp"

namespace minisonde {

struct LaunchPoint {
  double time = 0.0;  // s
  double lat = 0.0;   // deg
  double lon = 0.0;   // deg
  double alt = 0.0;   // m
};

/// Flight constants: 5 m/s ascent to a 30 km burst, payload descent 5 m/s,
/// minisonde descent 3 m/s.
struct FlightParams {
  double ascent_rate = 5.0;
  double burst_altitude = 30000.0;
  double payload_descent_rate = 5.0;
  double minisonde_descent_rate = 3.0;
  double time_step = 10.0;
  LaunchPoint launch;

  void validate() const;
};

enum class Phase { Ascent, Descent };

const char* to_string(Phase phase);

struct FlightState {
  double time = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  double alt = 0.0;
  AtmoSample sample;
  Phase phase = Phase::Ascent;

  bool operator==(const FlightState&) const = default;
};

struct Trajectory {
  std::vector<FlightState> states;
  /// Index of the last ascent state, when the ascent completed.
  std::optional<std::size_t> burst_index;
  std::vector<std::size_t> drop_indices;
  /// Set when integration left the forecast domain; `states` is the usable prefix.
  bool domain_exit = false;

  bool empty() const { return states.empty(); }
  const FlightState& back() const { return states.back(); }
  /// Throws DomainExit when the flight left the domain.
  void require_complete() const;

  bool operator==(const Trajectory&) const = default;
};

/// Forward-Euler advection at constant vertical rate. `sampler(t, lat, lon, alt)`
/// returns the atmosphere at a point; `domain` bounds where it may be queried.
/// The final step is shortened so the target altitude is hit exactly.
template <typename Sampler>
Trajectory integrate_vertical(const Sampler& sampler, const GridAxes& domain, const LaunchPoint& start,
                              double vertical_rate, double target_alt, double time_step, Phase phase) {
  Trajectory traj;
  if (!domain.contains(start.time, start.lat, start.lon, start.alt)) {
    traj.domain_exit = true;
    return traj;
  }
  const double direction = target_alt >= start.alt ? 1.0 : -1.0;
  const double full_climb = vertical_rate * time_step;
  FlightState s{start.time, start.lat, start.lon, start.alt, sampler(start.time, start.lat, start.lon, start.alt), phase};
  traj.states.push_back(s);
  for (std::size_t k = 1;; ++k) {
    const double remaining = direction * (target_alt - s.alt);
    if (remaining <= 0.0) break;
    const bool last = remaining <= full_climb;
    const double dt = last ? time_step * (remaining / full_climb) : time_step;
    FlightState next;
    next.phase = phase;
    next.lat = s.lat + s.sample.wind_v * dt / geo::meters_per_deg_lat();
    next.lon = s.lon + s.sample.wind_u * dt / geo::meters_per_deg_lon(s.lat);
    if (last) {
      next.alt = target_alt;
      next.time = s.time + dt;
    } else {
      const double step = static_cast<double>(k);
      next.alt = start.alt + direction * step * full_climb;
      next.time = start.time + step * time_step;
    }
    if (!domain.contains(next.time, next.lat, next.lon, next.alt)) {
      traj.domain_exit = true;
      return traj;
    }
    next.sample = sampler(next.time, next.lat, next.lon, next.alt);
    traj.states.push_back(next);
    s = next;
    if (last) break;
  }
  return traj;
}

/// Ascent from the launch point to burst altitude, drifting with the wind.
Trajectory simulate_ascent(const ForecastGrid& grid, const FlightParams& params);

/// Descent from `start` at `descent_rate` until `ground_altitude`.
Trajectory simulate_descent(const ForecastGrid& grid, const LaunchPoint& start, double descent_rate,
                            double ground_altitude, double time_step);

/// Ascent followed by the payload descent to the lowest grid altitude.
Trajectory simulate_flight(const ForecastGrid& grid, const FlightParams& params);

/// Forecast values at every state. Throws OutOfDomain for states off the grid.
std::vector<AtmoSample> sample_along(const ForecastGrid& grid, const Trajectory& traj);

/// Horizontal distance between the final states of two trajectories on the tangent plane.
double endpoint_distance(const Trajectory& a, const Trajectory& b);

inline constexpr const char* kTrajectoryCsvHeader =
    "time_s,lat_deg,lon_deg,alt_m,wind_u_ms,wind_v_ms,pressure_hpa,phase";

std::string format_trajectory(const Trajectory& traj);
Trajectory parse_trajectory(const std::string& text);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace minisonde

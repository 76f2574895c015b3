#include "minisonde/trajectory.hpp"

#include <sstream>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"

namespace minisonde {

void FlightParams::validate() const {
  if (!(ascent_rate > 0.0) || !(payload_descent_rate > 0.0) || !(minisonde_descent_rate > 0.0)) {
    throw ValidationError("flight rates must be > 0");
  }
  if (!(time_step > 0.0)) throw ValidationError("time_step must be > 0");
  if (!(burst_altitude > launch.alt)) throw ValidationError("burst altitude must exceed launch altitude");
}

const char* to_string(Phase phase) { return phase == Phase::Ascent ? "ascent" : "descent"; }

void Trajectory::require_complete() const {
  if (domain_exit) throw DomainExit("trajectory left the forecast domain after " + std::to_string(states.size()) + " states");
}

namespace {

auto grid_sampler(const ForecastGrid& grid) {
  return [&grid](double t, double lat, double lon, double alt) { return interpolate(grid, t, lat, lon, alt); };
}

}  // namespace

Trajectory simulate_ascent(const ForecastGrid& grid, const FlightParams& params) {
  params.validate();
  Trajectory traj = integrate_vertical(grid_sampler(grid), grid.axes(), params.launch, params.ascent_rate,
                                       params.burst_altitude, params.time_step, Phase::Ascent);
  if (!traj.domain_exit && !traj.empty()) traj.burst_index = traj.states.size() - 1;
  return traj;
}

Trajectory simulate_descent(const ForecastGrid& grid, const LaunchPoint& start, double descent_rate,
                            double ground_altitude, double time_step) {
  if (!(descent_rate > 0.0) || !(time_step > 0.0)) throw ValidationError("descent rate and time step must be > 0");
  if (!(start.alt > ground_altitude)) throw ValidationError("descent must start above ground altitude");
  return integrate_vertical(grid_sampler(grid), grid.axes(), start, descent_rate, ground_altitude, time_step,
                            Phase::Descent);
}

Trajectory simulate_flight(const ForecastGrid& grid, const FlightParams& params) {
  Trajectory traj = simulate_ascent(grid, params);
  if (traj.domain_exit) return traj;
  const FlightState& top = traj.back();
  const double ground = std::max(params.launch.alt, grid.axes().altitudes.front());
  Trajectory down = simulate_descent(grid, {top.time, top.lat, top.lon, top.alt}, params.payload_descent_rate,
                                     ground, params.time_step);
  // The burst state is shared; skip its duplicate at the head of the descent.
  for (std::size_t i = 1; i < down.states.size(); ++i) traj.states.push_back(down.states[i]);
  traj.domain_exit = down.domain_exit;
  return traj;
}

std::vector<AtmoSample> sample_along(const ForecastGrid& grid, const Trajectory& traj) {
  std::vector<AtmoSample> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) out.push_back(interpolate(grid, s.time, s.lat, s.lon, s.alt));
  return out;
}

double endpoint_distance(const Trajectory& a, const Trajectory& b) {
  if (a.empty() || b.empty()) throw ValidationError("endpoint distance of an empty trajectory");
  return geo::planar_offset(a.back().lat, a.back().lon, b.back().lat, b.back().lon).norm();
}

std::string format_trajectory(const Trajectory& traj) {
  std::string out = kTrajectoryCsvHeader;
  out += '\n';
  for (const auto& s : traj.states) {
    for (double v : {s.time, s.lat, s.lon, s.alt, s.sample.wind_u, s.sample.wind_v, s.sample.pressure}) {
      out += csv::format_double(v);
      out += ',';
    }
    out += to_string(s.phase);
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Trajectory traj;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::is_comment_or_blank(line)) continue;
    if (!header) {
      if (line != kTrajectoryCsvHeader) throw ParseError("unexpected trajectory header '" + line + "'");
      header = true;
      continue;
    }
    const auto f = csv::split(line);
    const std::string ctx = "trajectory line " + std::to_string(line_no);
    if (f.size() != 8) throw ParseError(ctx + ": expected 8 columns");
    FlightState s;
    s.time = csv::parse_double(f[0], ctx);
    s.lat = csv::parse_double(f[1], ctx);
    s.lon = csv::parse_double(f[2], ctx);
    s.alt = csv::parse_double(f[3], ctx);
    s.sample = {csv::parse_double(f[4], ctx), csv::parse_double(f[5], ctx), csv::parse_double(f[6], ctx)};
    if (f[7] == "ascent") {
      s.phase = Phase::Ascent;
    } else if (f[7] == "descent") {
      s.phase = Phase::Descent;
    } else {
      throw ParseError(ctx + ": unknown phase '" + std::string(f[7]) + "'");
    }
    if (!traj.states.empty() && s.phase == Phase::Descent && traj.states.back().phase == Phase::Ascent) {
      traj.burst_index = traj.states.size() - 1;
    }
    traj.states.push_back(s);
  }
  if (!header) throw ParseError("trajectory file has no header");
  if (!traj.burst_index && !traj.states.empty() && traj.states.back().phase == Phase::Ascent) {
    traj.burst_index = traj.states.size() - 1;
  }
  return traj;
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  csv::write_text(path, format_trajectory(traj));
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : csv::read_lines(path)) text += l + "\n";
  return parse_trajectory(text);
}

}  // namespace minisonde

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "minisonde/evaluation.hpp"
#include "minisonde/forecast_grid.hpp"
#include "minisonde/gp.hpp"
#include "minisonde/refinement.hpp"
#include "minisonde/surprise.hpp"
#include "minisonde/trajectory.hpp"

namespace minisonde {

/// Uniform lattice description: 0.5 deg x 500 m x 3 h around the launch site.
struct GridConfig {
  double lat_min = 37.5, lat_max = 42.5, lat_step = 0.5;
  double lon_min = -105.0, lon_max = -95.0, lon_step = 0.5;
  double alt_min = 0.0, alt_max = 30000.0, alt_step = 500.0;
  double time_start = 0.0, time_end = 885600.0, time_step = 10800.0;

  GridAxes axes() const;
};

struct HyperGridSpec {
  std::vector<double> signal_variances{0.25, 1.0, 4.0};
  std::vector<double> length_scales{0.3, 1.0, 3.0};
  std::vector<double> noise_variances{1e-4, 1e-2, 1e-1};

  std::vector<gp::RbfParams<double>> expand(Eigen::Index dim) const;
};

/// Launches at a fixed site every `interval_s`, `count` times.
struct FlightSchedule {
  std::size_t count = 240;
  double interval_s = 3600.0;
  double first_launch_s = 0.0;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  GridConfig grid;
  SyntheticSpec synthetic;
  double issue_time_s = 0.0;
  double lag_s = 21600.0;
  /// RMS wind change (m/s) between the lagged and current forecast.
  double lag_magnitude = 2.0;
  /// RMS wind error (m/s) of the current forecast against the true atmosphere.
  double truth_magnitude = 0.3;
  FlightParams flight;
  FlightSchedule flights;
  std::size_t dataset_stride = 6;
  double train_fraction = 0.5;
  TrainOptions train;
  HyperGridSpec surprise_grid;
  HyperGridSpec refine_grid;
  int budget = 2;
  std::optional<double> band_floor_m;  // defaults to the launch altitude
  std::optional<std::size_t> target_flight;  // defaults to count / 2
  ObservationNoise noise;
  std::size_t obs_stride = 6;
  RefineOptions refine;
  bool write_grids = false;

  std::uint64_t require_seed() const;
  std::size_t target_index() const;
  double band_floor() const { return band_floor_m.value_or(flight.launch.alt); }
};

/// The standard synthetic scenario: westerly shear with a jet near 11 km,
/// two sinusoidal modes and smooth day-scale noise.
SyntheticSpec standard_synthetic_spec();

RunConfig default_config();
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
/// Throws IoError when the file is missing and ValidationError on bad content.
RunConfig load_config(const std::filesystem::path& path);

/// Launch parameters for every scheduled flight.
std::vector<FlightParams> scheduled_flights(const RunConfig& cfg);

struct ScenarioGrids {
  ForecastGrid lagged;  // prediction forecast, issued lag_s earlier
  ForecastGrid base;    // current forecast
  ForecastGrid truth;   // the atmosphere the balloon actually flies through
};

/// Grids derived from the root seed through the "grid", "lag" and "truth" substreams.
ScenarioGrids make_scenario_grids(const RunConfig& cfg);

}  // namespace minisonde

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "minisonde/forecast_grid.hpp"
#include "minisonde/gp.hpp"
#include "minisonde/refinement.hpp"
#include "minisonde/scheduler.hpp"
#include "minisonde/surprise.hpp"
#include "minisonde/trajectory.hpp"

namespace minisonde {

struct ChannelRms {
  double wind_u = 0.0;
  double wind_v = 0.0;
  double pressure = 0.0;
};

/// Per-channel sqrt(mean squared difference). Throws DimensionError on length
/// mismatch and ValidationError on empty input.
ChannelRms rms_error(std::span<const AtmoSample> predicted, std::span<const AtmoSample> truth);

/// Pearson correlation. Throws DegenerateCorrelation when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct RmsReport {
  ChannelRms original;
  ChannelRms refined;
  std::size_t count = 0;
};

struct CorrelationReport {
  double pearson_r = 0.0;
  std::size_t n = 0;
  std::vector<std::pair<double, double>> points;  // (predicted, true)
};

/// Correlation between predictive means and held-out labels.
CorrelationReport surprise_correlation(const gp::GpModel<double>& model, const SurpriseDataset& held_out);

struct ObservationNoise {
  double wind_ms = 0.1;
  double pressure_hpa = 0.5;
};

struct ExperimentOptions {
  ObservationNoise noise;
  std::uint64_t noise_seed = 0;
  /// Keep every `obs_stride`-th state of each sensor track as an observation.
  std::size_t obs_stride = 6;
  std::vector<gp::RbfParams<double>> hyper_grid = default_refine_grid();
  RefineOptions refine;
};

struct ExperimentResult {
  RmsReport rms;
  double base_error_m = 0.0;
  double refined_error_m = 0.0;
  Trajectory truth_track;
  Trajectory base_track;
  Trajectory refined_track;
  std::vector<Trajectory> minisonde_tracks;
  std::vector<Observation> observations;
  std::optional<RefinedForecast> refined;
};

/// Flies the balloon through `truth`, releases minisondes at the planned
/// altitudes, refines `base` with the noisy observations, then scores base and
/// refined forecasts against truth along the true ascent and by the burst-point
/// distance of their predicted ascents.
ExperimentResult run_refinement_experiment(const ForecastGrid& truth, std::shared_ptr<const ForecastGrid> base,
                                           const FlightParams& flight, const DeploymentPlan& plan,
                                           const ExperimentOptions& options = {});

nlohmann::json rms_to_json(const RmsReport& report);
std::string rms_table(const RmsReport& report);
nlohmann::json correlation_to_json(const CorrelationReport& report);
std::string correlation_text(const CorrelationReport& report);
std::string scatter_csv(const CorrelationReport& report);

}  // namespace minisonde

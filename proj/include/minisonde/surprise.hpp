#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "minisonde/forecast_grid.hpp"
#include "minisonde/gp.hpp"
#include "minisonde/trajectory.hpp"

namespace minisonde {

/// Forecast wind norms at or below this are too small to normalize by.
inline constexpr double kDegenerateWindMs = 1e-6;

/// ||predicted - observed|| / ||predicted||. Not symmetric in its arguments.
/// Throws DegenerateForecast when ||predicted|| <= kDegenerateWindMs.
double surprise(const Eigen::Vector2d& predicted, const Eigen::Vector2d& observed);

/// Features are (altitude m, wind_u m/s, wind_v m/s, pressure hPa) from the
/// prediction forecast; the label is the surprise against the newer forecast.
struct SurpriseSample {
  Eigen::Vector4d features;
  double label = 0.0;
  std::size_t flight_id = 0;
};

struct SurpriseDataset {
  std::vector<SurpriseSample> samples;
  double old_issue_time = 0.0;
  double new_issue_time = 0.0;
  std::vector<std::size_t> flight_ids;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  gp::Matrix<double> features() const;
  gp::Vector<double> labels() const;
};

struct DatasetOptions {
  double lag_s = 21600.0;
  /// Keep every `stride`-th trajectory state (6 => one sample per minute at 10 s steps).
  std::size_t stride = 6;
};

/// Simulates each flight on `old_grid` and labels every kept ascent state with
/// the surprise of `new_grid` relative to `old_grid` at the same point.
/// Near-zero forecast winds are skipped. Sample flight ids are indices into `flights`.
SurpriseDataset build_dataset(const ForecastGrid& old_grid, const ForecastGrid& new_grid,
                              std::span<const FlightParams> flights, const DatasetOptions& options = {});

/// Subset of `dataset` whose samples belong to the given flights, in original order.
SurpriseDataset select_flights(const SurpriseDataset& dataset, std::span<const std::size_t> flight_ids);

struct TrainOptions {
  /// Cap on points used for the likelihood grid search.
  std::size_t max_select_points = 300;
  /// Cap on points in the fitted model.
  std::size_t max_fit_points = 1000;
};

/// Hyperparameter grid search followed by an exact fit. Large datasets are
/// thinned to evenly spaced samples under the caps. With fewer than three
/// samples the first grid entry is used unchanged.
gp::GpModel<double> train_surprise_model(const SurpriseDataset& dataset,
                                         const std::vector<gp::RbfParams<double>>& hyper_grid,
                                         const TrainOptions& options = {});

struct SurpriseEstimate {
  double altitude = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Predicted surprise at each ascent state of `traj`, features read from `grid`.
std::vector<SurpriseEstimate> predict_along(const gp::GpModel<double>& model, const ForecastGrid& grid,
                                            const Trajectory& traj);

/// Evenly spaced indices: floor(i * n / m) for i < m, or all of [0, n) when n <= m.
std::vector<std::size_t> even_subsample(std::size_t n, std::size_t m);

inline constexpr const char* kDatasetCsvHeader = "alt_m,wind_u_ms,wind_v_ms,pressure_hpa,surprise";

std::string format_dataset(const SurpriseDataset& dataset);
SurpriseDataset parse_dataset(const std::string& text);
void save_dataset(const SurpriseDataset& dataset, const std::filesystem::path& path);
SurpriseDataset load_dataset(const std::filesystem::path& path);

}  // namespace minisonde

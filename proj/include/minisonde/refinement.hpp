#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "minisonde/forecast_grid.hpp"
#include "minisonde/gp.hpp"
#include "minisonde/trajectory.hpp"

namespace minisonde {

/// In-situ measurement from the main balloon ("main") or a minisonde ("minisonde-<k>").
struct Observation {
  double time = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  double alt = 0.0;
  AtmoSample value;
  std::string source = "main";
};

enum class Channel { WindU = 0, WindV = 1, Pressure = 2 };
inline constexpr std::size_t kChannelCount = 3;

struct RefineOptions {
  /// Minimum noise variance (standardized units) of the residual GPs.
  double noise_floor = 1e-2;
  /// Keep every `stride`-th observation.
  std::size_t stride = 1;
  std::size_t max_select_points = 300;
  std::size_t max_fit_points = 1500;
};

/// Base forecast plus one residual GP per channel over (lat, lon, alt).
/// Without observations it reproduces the base forecast exactly.
class RefinedForecast {
 public:
  RefinedForecast(std::shared_ptr<const ForecastGrid> base,
                  std::array<std::optional<gp::GpModel<double>>, kChannelCount> residuals);

  const ForecastGrid& base() const { return *base_; }
  std::shared_ptr<const ForecastGrid> base_ptr() const { return base_; }
  const std::optional<gp::GpModel<double>>& residual(Channel c) const { return residuals_[static_cast<std::size_t>(c)]; }
  bool is_identity() const;

 private:
  std::shared_ptr<const ForecastGrid> base_;
  std::array<std::optional<gp::GpModel<double>>, kChannelCount> residuals_;
};

/// Fits observed-minus-base residuals per channel. Hyperparameter noise
/// variances are raised to the noise floor; fewer than three observations use
/// the first grid entry. Throws OutOfDomain for observations off the grid.
RefinedForecast refine(std::shared_ptr<const ForecastGrid> base, std::span<const Observation> observations,
                       const std::vector<gp::RbfParams<double>>& hyper_grid, const RefineOptions& options = {});

/// Base interpolation plus residual means; pressure kept strictly positive.
AtmoSample query_refined(const RefinedForecast& rf, double t, double lat, double lon, double alt);

/// simulate_ascent with winds drawn from the refined forecast.
Trajectory repredict_trajectory(const RefinedForecast& rf, const FlightParams& params);

/// Default residual hyperparameter grid over (lat, lon, alt).
std::vector<gp::RbfParams<double>> default_refine_grid();

inline constexpr const char* kObservationCsvHeader =
    "time_s,lat_deg,lon_deg,alt_m,wind_u_ms,wind_v_ms,pressure_hpa,source";

std::string format_observations(std::span<const Observation> obs);
std::vector<Observation> parse_observations(const std::string& text);
void save_observations(std::span<const Observation> obs, const std::filesystem::path& path);
std::vector<Observation> load_observations(const std::filesystem::path& path);

/// Residual models as JSON (null for channels without a model). The base grid
/// is referenced by path and reloaded separately.
nlohmann::json refined_to_json(const RefinedForecast& rf, const std::string& base_grid_path);
RefinedForecast refined_from_json(const nlohmann::json& j, std::shared_ptr<const ForecastGrid> base);

}  // namespace minisonde

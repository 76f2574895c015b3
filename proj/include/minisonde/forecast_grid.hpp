#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace minisonde {

/// Coordinate axes of a forecast lattice. Every axis is strictly increasing with
/// at least two entries; spacing may be non-uniform.
struct GridAxes {
  std::vector<double> times;      // seconds, epoch-relative
  std::vector<double> altitudes;  // meters
  std::vector<double> lats;       // degrees
  std::vector<double> lons;       // degrees

  /// Throws ValidationError when an axis is too short, unsorted or out of range.
  void validate() const;

  std::array<std::size_t, 4> shape() const {
    return {times.size(), altitudes.size(), lats.size(), lons.size()};
  }
  std::size_t size() const { return times.size() * altitudes.size() * lats.size() * lons.size(); }

  bool contains(double t, double lat, double lon, double alt) const;

  bool operator==(const GridAxes&) const = default;
};

/// Evenly spaced axis from `first` to `last` inclusive. `last - first` must be
/// a whole multiple of `step` up to rounding.
std::vector<double> make_axis(double first, double last, double step);

struct AtmoSample {
  double wind_u = 0.0;    // m/s, eastward
  double wind_v = 0.0;    // m/s, northward
  double pressure = 0.0;  // hPa

  bool operator==(const AtmoSample&) const = default;
};

/// Immutable 4-D lattice (time x altitude x lat x lon) of winds and pressure.
/// Fields are flattened row-major with longitude varying fastest.
class ForecastGrid {
 public:
  ForecastGrid(GridAxes axes, Eigen::VectorXd wind_u, Eigen::VectorXd wind_v,
               Eigen::VectorXd pressure, double issue_time);

  const GridAxes& axes() const { return axes_; }
  const Eigen::VectorXd& wind_u() const { return wind_u_; }
  const Eigen::VectorXd& wind_v() const { return wind_v_; }
  const Eigen::VectorXd& pressure() const { return pressure_; }
  double issue_time() const { return issue_time_; }

  std::size_t index(std::size_t it, std::size_t ia, std::size_t ilat, std::size_t ilon) const {
    return ((it * axes_.altitudes.size() + ia) * axes_.lats.size() + ilat) * axes_.lons.size() + ilon;
  }

  AtmoSample at(std::size_t it, std::size_t ia, std::size_t ilat, std::size_t ilon) const {
    const std::size_t k = index(it, ia, ilat, ilon);
    return {wind_u_[k], wind_v_[k], pressure_[k]};
  }

  /// Same grid values with a different issue time.
  ForecastGrid with_issue_time(double issue_time) const;

  bool operator==(const ForecastGrid& other) const;

 private:
  GridAxes axes_;
  Eigen::VectorXd wind_u_;
  Eigen::VectorXd wind_v_;
  Eigen::VectorXd pressure_;
  double issue_time_;
};

/// Multilinear interpolation over the 16 lattice points enclosing the query.
/// Throws OutOfDomain outside the axis bounding box; never extrapolates.
AtmoSample interpolate(const ForecastGrid& grid, double t, double lat, double lon, double alt);

/// CSV grid I/O. Header: time_s,alt_m,lat_deg,lon_deg,wind_u_ms,wind_v_ms,pressure_hpa.
/// The issue time travels in an optional `# issue_time_s=<value>` comment line.
ForecastGrid load_grid(const std::filesystem::path& path);
ForecastGrid parse_grid(const std::string& text);
std::string format_grid(const ForecastGrid& grid);
void save_grid(const ForecastGrid& grid, const std::filesystem::path& path);

inline constexpr const char* kGridCsvHeader =
    "time_s,alt_m,lat_deg,lon_deg,wind_u_ms,wind_v_ms,pressure_hpa";

// --- synthetic forecasts -------------------------------------------------

enum class ModeAxis { East, North, Up };

struct ShearKnot {
  double alt_m = 0.0;
  double u_ms = 0.0;
  double v_ms = 0.0;
};

/// Sinusoid along one spatial axis, added to both wind components with
/// independent seeded phases.
struct WindMode {
  double amplitude_ms = 0.0;
  double wavelength_m = 1.0;
  ModeAxis axis = ModeAxis::East;
};

/// Smooth seeded noise with an RBF-like correlation structure.
struct NoiseSpec {
  double amplitude_ms = 0.0;
  double length_scale_m = 200000.0;  // horizontal
  double vertical_scale_m = 0.0;     // 0 means "same as length_scale_m"
  double time_scale_s = 86400.0;
};

struct SyntheticSpec {
  std::vector<ShearKnot> shear;  // linear in altitude, held constant beyond the end knots
  std::vector<WindMode> modes;
  NoiseSpec noise;
  /// Relative amplitude of the smooth multiplicative pressure perturbation.
  double pressure_rel_amplitude = 0.0;
};

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

inline constexpr double kSeaLevelPressureHpa = 1013.25;
inline constexpr double kScaleHeightM = 8500.0;

inline double barometric_pressure(double alt_m) {
  return kSeaLevelPressureHpa * std::exp(-alt_m / kScaleHeightM);
}

/// Deterministic synthetic forecast: shear profile + sinusoidal modes + smooth
/// noise for winds, barometric pressure with a small smooth perturbation.
ForecastGrid generate_synthetic(std::uint64_t seed, const GridAxes& axes, const SyntheticSpec& spec);

/// Relative pressure perturbation applied by perturb_grid per m/s of magnitude.
inline constexpr double kPerturbPressurePerMs = 0.01;

/// Adds a seeded smooth perturbation to the winds whose lattice RMS equals
/// `magnitude` (m/s) per component. Its amplitude peaks around the tropopause.
/// Pressure receives a multiplicative perturbation of relative size
/// kPerturbPressurePerMs * magnitude and is re-clamped to stay non-increasing
/// with altitude. magnitude == 0 returns the input unchanged.
ForecastGrid perturb_grid(const ForecastGrid& grid, std::uint64_t seed, double magnitude);

}  // namespace minisonde

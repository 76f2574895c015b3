#pragma once

// Independent reference implementations and small fixtures shared by the tests.
// Oracles deliberately avoid Eigen and the library's own helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "minisonde/config.hpp"
#include "minisonde/forecast_grid.hpp"
#include "minisonde/random.hpp"
#include "minisonde/scheduler.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline Vec dense_solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// log N(y | 0, A) with the determinant taken from elimination pivots.
inline double log_gaussian_density(Mat a, const Vec& y) {
  const std::size_t n = y.size();
  const Vec alpha = dense_solve(a, y);
  double logdet = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
    logdet += std::log(std::fabs(a[col][col]));
  }
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += y[i] * alpha[i];
  return -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * 3.14159265358979323846);
}

inline double rbf(const Vec& a, const Vec& b, double sv, const Vec& ls) {
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / ls[i];
    q += d * d;
  }
  return sv * std::exp(-0.5 * q);
}

struct GpPrediction {
  Vec mean;
  Vec variance;
};

/// Exact GP prediction with population-std standardization of inputs and
/// targets and a direct dense solve against K + diag I.
inline GpPrediction gp_predict(const Mat& x, const Vec& y, double sv, const Vec& ls, double diag, double noise,
                               const Mat& query) {
  const std::size_t n = x.size(), d = x[0].size();
  Vec mu(d, 0.0), sd(d, 0.0);
  for (const auto& r : x)
    for (std::size_t j = 0; j < d; ++j) mu[j] += r[j] / static_cast<double>(n);
  for (const auto& r : x)
    for (std::size_t j = 0; j < d; ++j) sd[j] += (r[j] - mu[j]) * (r[j] - mu[j]) / static_cast<double>(n);
  for (auto& s : sd) s = std::max(std::sqrt(s), 1e-12);
  double ym = 0.0, ys = 0.0;
  for (double v : y) ym += v / static_cast<double>(n);
  for (double v : y) ys += (v - ym) * (v - ym) / static_cast<double>(n);
  ys = std::max(std::sqrt(ys), 1e-12);

  auto norm = [&](const Vec& r) {
    Vec o(d);
    for (std::size_t j = 0; j < d; ++j) o[j] = (r[j] - mu[j]) / sd[j];
    return o;
  };
  Mat xs;
  for (const auto& r : x) xs.push_back(norm(r));
  Vec yn(n);
  for (std::size_t i = 0; i < n; ++i) yn[i] = (y[i] - ym) / ys;

  Mat k(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf(xs[i], xs[j], sv, ls) + (i == j ? diag : 0.0);
  const Vec alpha = dense_solve(k, yn);

  GpPrediction out;
  for (const auto& qraw : query) {
    const Vec q = norm(qraw);
    Vec ks(n);
    for (std::size_t i = 0; i < n; ++i) ks[i] = rbf(xs[i], q, sv, ls);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += ks[i] * alpha[i];
    const Vec w = dense_solve(k, ks);
    double red = 0.0;
    for (std::size_t i = 0; i < n; ++i) red += ks[i] * w[i];
    out.mean.push_back(ym + ys * m);
    out.variance.push_back(std::max(sv + noise - red, 0.0) * ys * ys);
  }
  return out;
}

inline std::size_t bracket(const std::vector<double>& axis, double v) {
  std::size_t i = 0;
  while (i + 2 < axis.size() && v >= axis[i + 1]) ++i;
  return i;
}

inline double lerp1(const std::vector<double>& axis, double v, const std::function<double(std::size_t)>& at) {
  const std::size_t i = bracket(axis, v);
  const double w = (v - axis[i]) / (axis[i + 1] - axis[i]);
  return at(i) * (1.0 - w) + at(i + 1) * w;
}

/// Repeated axis-by-axis linear interpolation: lon, then lat, then altitude, then time.
inline double nested_interp(const minisonde::GridAxes& ax, const std::function<double(std::size_t, std::size_t, std::size_t, std::size_t)>& f,
                            double t, double lat, double lon, double alt) {
  return lerp1(ax.times, t, [&](std::size_t it) {
    return lerp1(ax.altitudes, alt, [&](std::size_t ia) {
      return lerp1(ax.lats, lat, [&](std::size_t ila) {
        return lerp1(ax.lons, lon, [&](std::size_t ilo) { return f(it, ia, ila, ilo); });
      });
    });
  });
}

/// Per band: points with low <= alt < high (the top band is closed); highest
/// surprise wins, earliest listed (lowest altitude) on ties.
inline std::vector<std::pair<double, std::size_t>> band_argmax(const std::vector<minisonde::ProfilePoint>& profile,
                                                               int budget, double burst, double floor) {
  std::vector<std::pair<double, std::size_t>> out;
  const double w = (burst - floor) / budget;
  for (int b = 0; b < budget; ++b) {
    const double low = floor + w * b;
    const double high = b == budget - 1 ? burst : floor + w * (b + 1);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < profile.size(); ++i) {
      const double a = profile[i].altitude;
      const bool inside = a >= low && (b == budget - 1 ? a <= high : a < high);
      if (!inside) continue;
      if (!best || profile[i].surprise > profile[*best].surprise) best = i;
    }
    if (best) out.emplace_back(profile[*best].altitude, static_cast<std::size_t>(b));
  }
  return out;
}

inline double pearson(const Vec& a, const Vec& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / (std::sqrt(n * saa - sa * sa) * std::sqrt(n * sbb - sb * sb));
}

}  // namespace oracle

namespace fixture {

using minisonde::AtmoSample;
using minisonde::ForecastGrid;
using minisonde::GridAxes;

template <typename F>
ForecastGrid grid_from(const GridAxes& ax, F f, double issue_time = 0.0) {
  const std::size_t n = ax.size();
  Eigen::VectorXd u(n), v(n), p(n);
  std::size_t k = 0;
  for (double t : ax.times)
    for (double a : ax.altitudes)
      for (double la : ax.lats)
        for (double lo : ax.lons) {
          const AtmoSample s = f(t, a, la, lo);
          u[k] = s.wind_u;
          v[k] = s.wind_v;
          p[k] = s.pressure;
          ++k;
        }
  return ForecastGrid(ax, u, v, p, issue_time);
}

/// Irregularly spaced axes used by interpolation tests.
inline GridAxes irregular_axes() {
  return {{0.0, 3600.0, 9000.0, 10800.0},
          {0.0, 750.0, 2000.0, 4500.0, 5000.0},
          {38.0, 38.4, 39.5, 40.0},
          {-105.0, -104.1, -103.0, -102.75}};
}

/// Axes wide enough for a full flight from (40, -103) with moderate winds.
inline GridAxes flight_axes(double lat0 = 36.0, double lat1 = 44.0) {
  return {{0.0, 20000.0}, minisonde::make_axis(0.0, 30000.0, 1000.0), {lat0, lat1}, {-110.0, -95.0}};
}

inline ForecastGrid uniform_wind(double u, double v, const GridAxes& ax = flight_axes()) {
  return grid_from(ax, [u, v](double, double a, double, double) {
    return AtmoSample{u, v, minisonde::barometric_pressure(a)};
  });
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("minisonde-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Reduced scenario: 12 hourly flights over a coarse grid.
inline minisonde::RunConfig small_config() {
  minisonde::RunConfig cfg = minisonde::default_config();
  cfg.seed = 17;
  cfg.grid.lat_min = 38.5;
  cfg.grid.lat_max = 41.5;
  cfg.grid.lon_min = -104.0;
  cfg.grid.lon_max = -98.0;
  cfg.grid.alt_step = 1000.0;
  cfg.grid.time_end = 86400.0;
  cfg.flights.count = 12;
  cfg.train.max_select_points = 60;
  cfg.train.max_fit_points = 200;
  cfg.surprise_grid.noise_variances = {1e-2};
  cfg.refine.max_select_points = 60;
  return cfg;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Ascent profile sampled every 50 m with two bumps peaking at the given altitudes.
inline std::vector<minisonde::ProfilePoint> two_peak_profile(double peak_low, double peak_high) {
  std::vector<minisonde::ProfilePoint> out;
  for (double a = 0.0; a <= 30000.0; a += 50.0) {
    const double s = 0.6 * std::exp(-std::pow((a - peak_low) / 1500.0, 2)) +
                     0.45 * std::exp(-std::pow((a - peak_high) / 2500.0, 2)) + 0.05;
    out.push_back({a, s});
  }
  return out;
}

inline std::vector<minisonde::ProfilePoint> random_profile(minisonde::Rng& rng, std::size_t n) {
  std::vector<minisonde::ProfilePoint> out;
  double a = rng.uniform(-500.0, 500.0);
  for (std::size_t i = 0; i < n; ++i) {
    a += rng.uniform(1.0, 400.0);
    // Coarse values make ties common.
    out.push_back({a, std::round(rng.uniform(0.0, 5.0))});
  }
  return out;
}

}  // namespace fixture

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "minisonde/error.hpp"
#include "minisonde/forecast_grid.hpp"
#include "minisonde/geo.hpp"
#include "minisonde/random.hpp"

namespace minisonde {

namespace {

constexpr int kFeatureCount = 64;

struct FieldScales {
  double horizontal_m;
  double vertical_m;
  double time_s;
};

/// Lattice coordinates in units of the correlation scales, on a tangent plane
/// centered on the domain.
struct ScaledAxes {
  std::vector<double> t, z, y, x;
};

ScaledAxes scale_axes(const GridAxes& axes, const FieldScales& s) {
  ScaledAxes out;
  const double lat_ref = 0.5 * (axes.lats.front() + axes.lats.back());
  const double lon_ref = 0.5 * (axes.lons.front() + axes.lons.back());
  const double mlat = geo::meters_per_deg_lat();
  const double mlon = geo::meters_per_deg_lon(lat_ref);
  for (double t : axes.times) out.t.push_back((t - axes.times.front()) / s.time_s);
  for (double z : axes.altitudes) out.z.push_back(z / s.vertical_m);
  for (double lat : axes.lats) out.y.push_back((lat - lat_ref) * mlat / s.horizontal_m);
  for (double lon : axes.lons) out.x.push_back((lon - lon_ref) * mlon / s.horizontal_m);
  return out;
}

/// Unit-variance smooth random field on the lattice from random Fourier
/// features, whose covariance approximates an RBF kernel in scaled coordinates.
/// The phase factorizes over axes, so the lattice sweep is one complex multiply
/// per point and feature.
Eigen::VectorXd smooth_field(const GridAxes& axes, const FieldScales& scales, std::uint64_t seed) {
  const ScaledAxes sa = scale_axes(axes, scales);
  Rng rng(seed);
  const auto [nt, na, nla, nlo] = axes.shape();
  Eigen::VectorXd field = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(axes.size()));
  using C = std::complex<double>;
  std::vector<C> et(nt), ez(na), ey(nla), ex(nlo);
  for (int m = 0; m < kFeatureCount; ++m) {
    const double wt = rng.normal(), wz = rng.normal(), wy = rng.normal(), wx = rng.normal();
    const double b = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < nt; ++i) et[i] = std::polar(1.0, wt * sa.t[i] + b);
    for (std::size_t i = 0; i < na; ++i) ez[i] = std::polar(1.0, wz * sa.z[i]);
    for (std::size_t i = 0; i < nla; ++i) ey[i] = std::polar(1.0, wy * sa.y[i]);
    for (std::size_t i = 0; i < nlo; ++i) ex[i] = std::polar(1.0, wx * sa.x[i]);
    Eigen::Index k = 0;
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ia = 0; ia < na; ++ia) {
        const C tz = et[it] * ez[ia];
        for (std::size_t ila = 0; ila < nla; ++ila) {
          const C tzy = tz * ey[ila];
          for (std::size_t ilo = 0; ilo < nlo; ++ilo) field[k++] += (tzy * ex[ilo]).real();
        }
      }
  }
  field *= std::sqrt(2.0 / kFeatureCount);
  return field;
}

double lattice_rms(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

void clamp_columns_monotone(const GridAxes& axes, Eigen::VectorXd& pressure) {
  const auto [nt, na, nla, nlo] = axes.shape();
  const std::size_t plane = nla * nlo;
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t ia = 1; ia < na; ++ia)
      for (std::size_t c = 0; c < plane; ++c) {
        const auto k = static_cast<Eigen::Index>((it * na + ia) * plane + c);
        const auto below = static_cast<Eigen::Index>((it * na + ia - 1) * plane + c);
        pressure[k] = std::min(pressure[k], pressure[below]);
      }
}

std::pair<double, double> shear_at(const std::vector<ShearKnot>& knots, double alt) {
  if (knots.empty()) return {0.0, 0.0};
  if (alt <= knots.front().alt_m) return {knots.front().u_ms, knots.front().v_ms};
  if (alt >= knots.back().alt_m) return {knots.back().u_ms, knots.back().v_ms};
  auto hi = std::upper_bound(knots.begin(), knots.end(), alt,
                             [](double a, const ShearKnot& k) { return a < k.alt_m; });
  auto lo = hi - 1;
  const double f = (alt - lo->alt_m) / (hi->alt_m - lo->alt_m);
  return {lo->u_ms + f * (hi->u_ms - lo->u_ms), lo->v_ms + f * (hi->v_ms - lo->v_ms)};
}

/// Vertical envelope of forecast error: larger near the tropopause jet level.
double perturbation_envelope(double alt_m) {
  const double z = (alt_m - 11000.0) / 5000.0;
  return 0.4 + std::exp(-z * z);
}

}  // namespace

ForecastGrid generate_synthetic(std::uint64_t seed, const GridAxes& axes, const SyntheticSpec& spec) {
  axes.validate();
  const auto n = static_cast<Eigen::Index>(axes.size());
  const auto [nt, na, nla, nlo] = axes.shape();

  std::vector<ShearKnot> knots = spec.shear;
  std::sort(knots.begin(), knots.end(), [](const ShearKnot& a, const ShearKnot& b) { return a.alt_m < b.alt_m; });

  const double lat_ref = 0.5 * (axes.lats.front() + axes.lats.back());
  const double lon_ref = 0.5 * (axes.lons.front() + axes.lons.back());
  const double mlat = geo::meters_per_deg_lat();
  const double mlon = geo::meters_per_deg_lon(lat_ref);

  struct Phased {
    WindMode mode;
    double phase_u, phase_v;
  };
  std::vector<Phased> modes;
  Rng phase_rng(substream_seed(seed, "modes"));
  for (const auto& m : spec.modes) {
    if (!(m.wavelength_m > 0.0)) throw ValidationError("mode wavelength must be positive");
    const double pu = phase_rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double pv = phase_rng.uniform(0.0, 2.0 * std::numbers::pi);
    modes.push_back({m, pu, pv});
  }

  Eigen::VectorXd u(n), v(n), p(n);
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double alt = axes.altitudes[ia];
      const auto [su, sv] = shear_at(knots, alt);
      for (std::size_t ila = 0; ila < nla; ++ila)
        for (std::size_t ilo = 0; ilo < nlo; ++ilo) {
          double wu = su, wv = sv;
          for (const auto& pm : modes) {
            double s = 0.0;
            switch (pm.mode.axis) {
              case ModeAxis::East: s = (axes.lons[ilo] - lon_ref) * mlon; break;
              case ModeAxis::North: s = (axes.lats[ila] - lat_ref) * mlat; break;
              case ModeAxis::Up: s = alt; break;
            }
            const double arg = 2.0 * std::numbers::pi * s / pm.mode.wavelength_m;
            wu += pm.mode.amplitude_ms * std::sin(arg + pm.phase_u);
            wv += pm.mode.amplitude_ms * std::sin(arg + pm.phase_v);
          }
          const auto k = static_cast<Eigen::Index>(((it * na + ia) * nla + ila) * nlo + ilo);
          u[k] = wu;
          v[k] = wv;
          p[k] = barometric_pressure(alt);
        }
    }

  const NoiseSpec& ns = spec.noise;
  const FieldScales scales{ns.length_scale_m, ns.vertical_scale_m > 0.0 ? ns.vertical_scale_m : ns.length_scale_m,
                           ns.time_scale_s};
  if (ns.amplitude_ms != 0.0) {
    if (!(scales.horizontal_m > 0.0) || !(scales.time_s > 0.0)) throw ValidationError("noise scales must be positive");
    u += ns.amplitude_ms * smooth_field(axes, scales, substream_seed(seed, "noise_u"));
    v += ns.amplitude_ms * smooth_field(axes, scales, substream_seed(seed, "noise_v"));
  }
  if (spec.pressure_rel_amplitude != 0.0) {
    const Eigen::VectorXd g = smooth_field(axes, scales, substream_seed(seed, "noise_p"));
    p.array() *= (spec.pressure_rel_amplitude * g.array()).exp();
    clamp_columns_monotone(axes, p);
  }
  return ForecastGrid(axes, std::move(u), std::move(v), std::move(p), 0.0);
}

ForecastGrid perturb_grid(const ForecastGrid& grid, std::uint64_t seed, double magnitude) {
  if (!(magnitude >= 0.0)) throw ValidationError("perturbation magnitude must be >= 0");
  if (magnitude == 0.0) return grid;
  const GridAxes& axes = grid.axes();
  const FieldScales scales{300000.0, 3000.0, 43200.0};
  const auto [nt, na, nla, nlo] = axes.shape();
  const std::size_t plane = nla * nlo;

  auto wind_delta = [&](std::string_view stream) {
    Eigen::VectorXd d = smooth_field(axes, scales, substream_seed(seed, stream));
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ia = 0; ia < na; ++ia) {
        const double env = perturbation_envelope(axes.altitudes[ia]);
        d.segment(static_cast<Eigen::Index>((it * na + ia) * plane), static_cast<Eigen::Index>(plane)) *= env;
      }
    const double rms = lattice_rms(d);
    if (rms > 0.0) d *= magnitude / rms;
    return d;
  };

  Eigen::VectorXd u = grid.wind_u() + wind_delta("perturb_u");
  Eigen::VectorXd v = grid.wind_v() + wind_delta("perturb_v");

  Eigen::VectorXd g = smooth_field(axes, scales, substream_seed(seed, "perturb_p"));
  const double grms = lattice_rms(g);
  if (grms > 0.0) g /= grms;
  Eigen::VectorXd p = grid.pressure().array() * (kPerturbPressurePerMs * magnitude * g.array()).exp();
  clamp_columns_monotone(axes, p);
  return ForecastGrid(axes, std::move(u), std::move(v), std::move(p), grid.issue_time());
}

// --- JSON ----------------------------------------------------------------

namespace {

ModeAxis parse_axis(const std::string& s) {
  if (s == "east" || s == "x" || s == "lon") return ModeAxis::East;
  if (s == "north" || s == "y" || s == "lat") return ModeAxis::North;
  if (s == "up" || s == "z" || s == "alt") return ModeAxis::Up;
  throw ValidationError("unknown mode axis '" + s + "'");
}

const char* axis_name(ModeAxis a) {
  switch (a) {
    case ModeAxis::East: return "east";
    case ModeAxis::North: return "north";
    case ModeAxis::Up: return "up";
  }
  return "east";
}

}  // namespace

void to_json(nlohmann::json& j, const SyntheticSpec& spec) {
  j = nlohmann::json::object();
  j["shear"] = nlohmann::json::array();
  for (const auto& k : spec.shear) j["shear"].push_back({{"alt_m", k.alt_m}, {"u_ms", k.u_ms}, {"v_ms", k.v_ms}});
  j["modes"] = nlohmann::json::array();
  for (const auto& m : spec.modes) {
    j["modes"].push_back({{"amplitude_ms", m.amplitude_ms}, {"wavelength_m", m.wavelength_m}, {"axis", axis_name(m.axis)}});
  }
  j["noise"] = {{"amplitude_ms", spec.noise.amplitude_ms},
                {"length_scale_m", spec.noise.length_scale_m},
                {"vertical_scale_m", spec.noise.vertical_scale_m},
                {"time_scale_s", spec.noise.time_scale_s}};
  j["pressure_rel_amplitude"] = spec.pressure_rel_amplitude;
}

void from_json(const nlohmann::json& j, SyntheticSpec& spec) {
  spec = SyntheticSpec{};
  try {
    for (const auto& k : j.value("shear", nlohmann::json::array())) {
      spec.shear.push_back({k.at("alt_m").get<double>(), k.value("u_ms", 0.0), k.value("v_ms", 0.0)});
    }
    for (const auto& m : j.value("modes", nlohmann::json::array())) {
      spec.modes.push_back({m.at("amplitude_ms").get<double>(), m.at("wavelength_m").get<double>(),
                            parse_axis(m.value("axis", std::string("east")))});
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      spec.noise.amplitude_ms = n.value("amplitude_ms", 0.0);
      spec.noise.length_scale_m = n.value("length_scale_m", spec.noise.length_scale_m);
      spec.noise.vertical_scale_m = n.value("vertical_scale_m", 0.0);
      spec.noise.time_scale_s = n.value("time_scale_s", spec.noise.time_scale_s);
    }
    spec.pressure_rel_amplitude = j.value("pressure_rel_amplitude", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad synthetic spec: ") + e.what());
  }
}

}  // namespace minisonde

#include "minisonde/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"
#include "minisonde/gp_io.hpp"
#include "minisonde/surprise.hpp"

namespace minisonde {

namespace {

constexpr double kMinPressureHpa = 1e-3;
constexpr const char* kChannelNames[kChannelCount] = {"wind_u", "wind_v", "pressure"};

double channel_value(const AtmoSample& s, std::size_t c) {
  switch (c) {
    case 0: return s.wind_u;
    case 1: return s.wind_v;
    default: return s.pressure;
  }
}

}  // namespace

RefinedForecast::RefinedForecast(std::shared_ptr<const ForecastGrid> base,
                                 std::array<std::optional<gp::GpModel<double>>, kChannelCount> residuals)
    : base_(std::move(base)), residuals_(std::move(residuals)) {
  if (!base_) throw ValidationError("refined forecast needs a base grid");
  for (const auto& r : residuals_) {
    if (r && r->input_dim() != 3) throw DimensionError("residual models take (lat, lon, alt) inputs");
  }
}

bool RefinedForecast::is_identity() const {
  return std::none_of(residuals_.begin(), residuals_.end(), [](const auto& r) { return r.has_value(); });
}

std::vector<gp::RbfParams<double>> default_refine_grid() { return gp::default_hyper_grid<double>(3); }

RefinedForecast refine(std::shared_ptr<const ForecastGrid> base, std::span<const Observation> observations,
                       const std::vector<gp::RbfParams<double>>& hyper_grid, const RefineOptions& options) {
  if (!base) throw ValidationError("refine needs a base grid");
  if (options.stride < 1) throw ValidationError("observation stride must be >= 1");
  std::vector<const Observation*> kept;
  for (std::size_t i = 0; i < observations.size(); i += options.stride) kept.push_back(&observations[i]);
  if (kept.empty()) return RefinedForecast(std::move(base), {});
  if (hyper_grid.empty()) throw ValidationError("hyperparameter grid is empty");

  std::vector<gp::RbfParams<double>> grid = hyper_grid;
  for (auto& p : grid) p.noise_variance = std::max(p.noise_variance, options.noise_floor);

  const auto n = static_cast<Eigen::Index>(kept.size());
  gp::Matrix<double> x(n, 3);
  gp::Matrix<double> residual(n, static_cast<Eigen::Index>(kChannelCount));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation& o = *kept[static_cast<std::size_t>(i)];
    const double vals[] = {o.time, o.lat, o.lon, o.alt, o.value.wind_u, o.value.wind_v, o.value.pressure};
    if (!std::all_of(std::begin(vals), std::end(vals), [](double v) { return std::isfinite(v); })) {
      throw InvalidData("non-finite observation");
    }
    if (!(o.value.pressure > 0.0)) throw ValidationError("observed pressure must be > 0");
    const AtmoSample b = interpolate(*base, o.time, o.lat, o.lon, o.alt);
    x.row(i) << o.lat, o.lon, o.alt;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      residual(i, static_cast<Eigen::Index>(c)) = channel_value(o.value, c) - channel_value(b, c);
    }
  }

  std::array<std::optional<gp::GpModel<double>>, kChannelCount> models;
  const auto select_idx = even_subsample(kept.size(), std::max<std::size_t>(3, options.max_select_points));
  const auto fit_idx = even_subsample(kept.size(), std::max<std::size_t>(1, options.max_fit_points));
  auto take = [&](const std::vector<std::size_t>& idx, std::size_t c) {
    gp::Matrix<double> xs(static_cast<Eigen::Index>(idx.size()), 3);
    gp::Vector<double> ys(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
      ys[static_cast<Eigen::Index>(i)] = residual(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(c));
    }
    return std::pair{std::move(xs), std::move(ys)};
  };
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    gp::RbfParams<double> params = grid.front();
    if (kept.size() >= 3) {
      const auto [xs, ys] = take(select_idx, c);
      params = gp::select_hyperparams(xs, ys, grid);
    }
    const auto [xf, yf] = take(fit_idx, c);
    models[c] = gp::fit(xf, yf, params);
  }
  return RefinedForecast(std::move(base), std::move(models));
}

AtmoSample query_refined(const RefinedForecast& rf, double t, double lat, double lon, double alt) {
  AtmoSample s = interpolate(rf.base(), t, lat, lon, alt);
  if (rf.is_identity()) return s;
  gp::Matrix<double> q(1, 3);
  q << lat, lon, alt;
  double* fields[kChannelCount] = {&s.wind_u, &s.wind_v, &s.pressure};
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& model = rf.residual(static_cast<Channel>(c));
    if (model) *fields[c] += gp::predict_mean(*model, q)[0];
  }
  s.pressure = std::max(s.pressure, kMinPressureHpa);
  return s;
}

Trajectory repredict_trajectory(const RefinedForecast& rf, const FlightParams& params) {
  params.validate();
  auto sampler = [&rf](double t, double lat, double lon, double alt) { return query_refined(rf, t, lat, lon, alt); };
  Trajectory traj = integrate_vertical(sampler, rf.base().axes(), params.launch, params.ascent_rate,
                                       params.burst_altitude, params.time_step, Phase::Ascent);
  if (!traj.domain_exit && !traj.empty()) traj.burst_index = traj.states.size() - 1;
  return traj;
}

std::string format_observations(std::span<const Observation> obs) {
  std::string out = kObservationCsvHeader;
  out += '\n';
  for (const auto& o : obs) {
    for (double v : {o.time, o.lat, o.lon, o.alt, o.value.wind_u, o.value.wind_v, o.value.pressure}) {
      out += csv::format_double(v);
      out += ',';
    }
    out += o.source;
    out += '\n';
  }
  return out;
}

std::vector<Observation> parse_observations(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Observation> obs;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::is_comment_or_blank(line)) continue;
    if (!header) {
      if (line != kObservationCsvHeader) throw ParseError("unexpected observation header '" + line + "'");
      header = true;
      continue;
    }
    const auto f = csv::split(line);
    const std::string ctx = "observation line " + std::to_string(line_no);
    if (f.size() != 8) throw ParseError(ctx + ": expected 8 columns");
    Observation o;
    o.time = csv::parse_double(f[0], ctx);
    o.lat = csv::parse_double(f[1], ctx);
    o.lon = csv::parse_double(f[2], ctx);
    o.alt = csv::parse_double(f[3], ctx);
    o.value = {csv::parse_double(f[4], ctx), csv::parse_double(f[5], ctx), csv::parse_double(f[6], ctx)};
    o.source = std::string(f[7]);
    obs.push_back(std::move(o));
  }
  if (!header) throw ParseError("observation file has no header");
  return obs;
}

void save_observations(std::span<const Observation> obs, const std::filesystem::path& path) {
  csv::write_text(path, format_observations(obs));
}

std::vector<Observation> load_observations(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : csv::read_lines(path)) text += l + "\n";
  return parse_observations(text);
}

nlohmann::json refined_to_json(const RefinedForecast& rf, const std::string& base_grid_path) {
  nlohmann::json j;
  j["base_grid"] = base_grid_path;
  j["channels"] = nlohmann::json::object();
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& m = rf.residual(static_cast<Channel>(c));
    j["channels"][kChannelNames[c]] = m ? gp::to_json(*m) : nlohmann::json(nullptr);
  }
  return j;
}

RefinedForecast refined_from_json(const nlohmann::json& j, std::shared_ptr<const ForecastGrid> base) {
  std::array<std::optional<gp::GpModel<double>>, kChannelCount> models;
  try {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto& m = j.at("channels").at(kChannelNames[c]);
      if (!m.is_null()) models[c] = gp::model_from_json(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad refined forecast document: ") + e.what());
  }
  return RefinedForecast(std::move(base), std::move(models));
}

}  // namespace minisonde

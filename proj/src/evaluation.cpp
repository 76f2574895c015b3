#include "minisonde/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <cstdio>
#include <limits>
#include <sstream>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"
#include "minisonde/random.hpp"

namespace minisonde {

ChannelRms rms_error(std::span<const AtmoSample> predicted, std::span<const AtmoSample> truth) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("predicted has " + std::to_string(predicted.size()) + " samples, truth has " +
                         std::to_string(truth.size()));
  }
  if (predicted.empty()) throw ValidationError("rms_error of empty sequences");
  double su = 0.0, sv = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double du = predicted[i].wind_u - truth[i].wind_u;
    const double dv = predicted[i].wind_v - truth[i].wind_v;
    const double dp = predicted[i].pressure - truth[i].pressure;
    su += du * du;
    sv += dv * dv;
    sp += dp * dp;
  }
  const auto n = static_cast<double>(predicted.size());
  return {std::sqrt(su / n), std::sqrt(sv / n), std::sqrt(sp / n)};
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("pearson inputs differ in length");
  if (a.size() < 2) throw DegenerateCorrelation("need at least two points");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DegenerateCorrelation("zero variance in correlation input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CorrelationReport surprise_correlation(const gp::GpModel<double>& model, const SurpriseDataset& held_out) {
  if (held_out.size() < 2) throw DegenerateCorrelation("held-out set needs at least two samples");
  const gp::Vector<double> truth = held_out.labels();
  if ((truth.array() == truth[0]).all()) throw DegenerateCorrelation("held-out labels have zero variance");
  const gp::Vector<double> pred = gp::predict_mean(model, held_out.features());
  CorrelationReport report;
  report.n = held_out.size();
  report.pearson_r = pearson(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                             std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())));
  for (Eigen::Index i = 0; i < pred.size(); ++i) report.points.emplace_back(pred[i], truth[i]);
  return report;
}

namespace {

std::size_t nearest_state(const Trajectory& traj, double alt) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.states[i].phase != Phase::Ascent) continue;
    const double d = std::abs(traj.states[i].alt - alt);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void observe_track(const Trajectory& track, std::size_t stride, const std::string& source, const ObservationNoise& noise,
                   Rng& rng, std::vector<Observation>& out) {
  for (std::size_t i = 0; i < track.states.size(); i += stride) {
    const FlightState& s = track.states[i];
    Observation o{s.time, s.lat, s.lon, s.alt, s.sample, source};
    o.value.wind_u += noise.wind_ms * rng.normal();
    o.value.wind_v += noise.wind_ms * rng.normal();
    o.value.pressure = std::max(o.value.pressure + noise.pressure_hpa * rng.normal(), 1e-3);
    out.push_back(std::move(o));
  }
}

}  // namespace

ExperimentResult run_refinement_experiment(const ForecastGrid& truth, std::shared_ptr<const ForecastGrid> base,
                                           const FlightParams& flight, const DeploymentPlan& plan,
                                           const ExperimentOptions& options) {
  if (!base) throw ValidationError("experiment needs a base grid");
  if (!(truth.axes() == base->axes())) throw ValidationError("truth and base grids must share axes");
  if (options.obs_stride < 1) throw ValidationError("observation stride must be >= 1");

  ExperimentResult result;
  result.truth_track = simulate_ascent(truth, flight);
  result.truth_track.require_complete();

  Rng rng(options.noise_seed);
  observe_track(result.truth_track, options.obs_stride, "main", options.noise, rng, result.observations);
  const double ground = std::max(flight.launch.alt, truth.axes().altitudes.front());
  for (std::size_t d = 0; d < plan.drops.size(); ++d) {
    const std::size_t at = nearest_state(result.truth_track, plan.drops[d].altitude);
    const FlightState& s = result.truth_track.states[at];
    result.truth_track.drop_indices.push_back(at);
    if (!(s.alt > ground)) continue;
    Trajectory down = simulate_descent(truth, {s.time, s.lat, s.lon, s.alt}, flight.minisonde_descent_rate, ground,
                                       flight.time_step);
    observe_track(down, options.obs_stride, "minisonde-" + std::to_string(d + 1), options.noise, rng,
                  result.observations);
    result.minisonde_tracks.push_back(std::move(down));
  }

  result.refined = refine(base, result.observations, options.hyper_grid, options.refine);
  const RefinedForecast& refined = *result.refined;

  std::vector<AtmoSample> truth_values, base_values, refined_values;
  for (const auto& s : result.truth_track.states) {
    truth_values.push_back(s.sample);
    base_values.push_back(interpolate(*base, s.time, s.lat, s.lon, s.alt));
    refined_values.push_back(query_refined(refined, s.time, s.lat, s.lon, s.alt));
  }
  result.rms.original = rms_error(base_values, truth_values);
  result.rms.refined = rms_error(refined_values, truth_values);
  result.rms.count = truth_values.size();

  result.base_track = simulate_ascent(*base, flight);
  result.base_track.require_complete();
  result.refined_track = repredict_trajectory(refined, flight);
  result.refined_track.require_complete();
  result.base_error_m = endpoint_distance(result.base_track, result.truth_track);
  result.refined_error_m = endpoint_distance(result.refined_track, result.truth_track);
  return result;
}

nlohmann::json rms_to_json(const RmsReport& report) {
  auto channel = [](double o, double r) { return nlohmann::json{{"original", o}, {"refined", r}}; };
  return {{"count", report.count},
          {"wind_u_ms", channel(report.original.wind_u, report.refined.wind_u)},
          {"wind_v_ms", channel(report.original.wind_v, report.refined.wind_v)},
          {"pressure_hpa", channel(report.original.pressure, report.refined.pressure)}};
}

std::string rms_table(const RmsReport& report) {
  std::ostringstream out;
  char buf[128];
  out << "Forecast RMS error (original vs refined)\n";
  std::snprintf(buf, sizeof(buf), "%-24s %10s %10s\n", "", "Original", "Refined");
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f\n", "Wind X-direction (m/s)", report.original.wind_u,
                report.refined.wind_u);
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f\n", "Wind Y-direction (m/s)", report.original.wind_v,
                report.refined.wind_v);
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f\n", "Pressure (hPa)", report.original.pressure,
                report.refined.pressure);
  out << buf;
  out << "samples: " << report.count << "\n";
  return out.str();
}

nlohmann::json correlation_to_json(const CorrelationReport& report) {
  return {{"pearson_r", report.pearson_r}, {"n", report.n}};
}

std::string correlation_text(const CorrelationReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "Surprise model: held-out Pearson r = %.4f over %zu samples\n", report.pearson_r,
                report.n);
  return buf;
}

std::string scatter_csv(const CorrelationReport& report) {
  std::string out = "predicted_surprise,true_surprise\n";
  for (const auto& [p, t] : report.points) out += csv::format_double(p) + "," + csv::format_double(t) + "\n";
  return out;
}

}  // namespace minisonde

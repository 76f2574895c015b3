#include "minisonde/surprise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"
#include "minisonde/parallel.hpp"

namespace minisonde {

double surprise(const Eigen::Vector2d& predicted, const Eigen::Vector2d& observed) {
  const double norm = predicted.norm();
  if (!(norm > kDegenerateWindMs)) {
    throw DegenerateForecast("forecast wind norm " + csv::format_double(norm) + " m/s is too small to normalize by");
  }
  return (predicted - observed).norm() / norm;
}

gp::Matrix<double> SurpriseDataset::features() const {
  gp::Matrix<double> x(static_cast<Eigen::Index>(samples.size()), 4);
  for (std::size_t i = 0; i < samples.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
  return x;
}

gp::Vector<double> SurpriseDataset::labels() const {
  gp::Vector<double> y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) y[static_cast<Eigen::Index>(i)] = samples[i].label;
  return y;
}

SurpriseDataset build_dataset(const ForecastGrid& old_grid, const ForecastGrid& new_grid,
                              std::span<const FlightParams> flights, const DatasetOptions& options) {
  if (options.stride < 1) throw ValidationError("dataset stride must be >= 1");
  const double lag = new_grid.issue_time() - old_grid.issue_time();
  if (lag != options.lag_s) {
    throw ValidationError("forecast issue-time lag " + csv::format_double(lag) + " s differs from configured " +
                          csv::format_double(options.lag_s) + " s");
  }
  std::vector<std::vector<SurpriseSample>> per_flight(flights.size());
  parallel_for(flights.size(), [&](std::size_t f) {
    const Trajectory traj = simulate_ascent(old_grid, flights[f]);
    for (std::size_t i = 0; i < traj.states.size(); i += options.stride) {
      const FlightState& s = traj.states[i];
      const AtmoSample truth = interpolate(new_grid, s.time, s.lat, s.lon, s.alt);
      const Eigen::Vector2d predicted(s.sample.wind_u, s.sample.wind_v);
      if (!(predicted.norm() > kDegenerateWindMs)) continue;
      SurpriseSample sample;
      sample.features << s.alt, s.sample.wind_u, s.sample.wind_v, s.sample.pressure;
      sample.label = surprise(predicted, Eigen::Vector2d(truth.wind_u, truth.wind_v));
      sample.flight_id = f;
      per_flight[f].push_back(sample);
    }
  });
  SurpriseDataset out;
  out.old_issue_time = old_grid.issue_time();
  out.new_issue_time = new_grid.issue_time();
  for (std::size_t f = 0; f < flights.size(); ++f) {
    out.flight_ids.push_back(f);
    out.samples.insert(out.samples.end(), per_flight[f].begin(), per_flight[f].end());
  }
  if (out.empty()) throw EmptyDataset("no usable samples after skipping degenerate forecasts");
  return out;
}

SurpriseDataset select_flights(const SurpriseDataset& dataset, std::span<const std::size_t> flight_ids) {
  SurpriseDataset out;
  out.old_issue_time = dataset.old_issue_time;
  out.new_issue_time = dataset.new_issue_time;
  out.flight_ids.assign(flight_ids.begin(), flight_ids.end());
  std::vector<std::size_t> sorted(flight_ids.begin(), flight_ids.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& s : dataset.samples) {
    if (std::binary_search(sorted.begin(), sorted.end(), s.flight_id)) out.samples.push_back(s);
  }
  return out;
}

std::vector<std::size_t> even_subsample(std::size_t n, std::size_t m) {
  std::vector<std::size_t> idx;
  if (n <= m) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t i = 0; i < m; ++i) idx.push_back(i * n / m);
  return idx;
}

namespace {

std::pair<gp::Matrix<double>, gp::Vector<double>> rows(const gp::Matrix<double>& x, const gp::Vector<double>& y,
                                                       const std::vector<std::size_t>& idx) {
  gp::Matrix<double> xs(static_cast<Eigen::Index>(idx.size()), x.cols());
  gp::Vector<double> ys(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    ys[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(idx[i])];
  }
  return {std::move(xs), std::move(ys)};
}

}  // namespace

gp::GpModel<double> train_surprise_model(const SurpriseDataset& dataset,
                                         const std::vector<gp::RbfParams<double>>& hyper_grid,
                                         const TrainOptions& options) {
  if (dataset.empty()) throw EmptyDataset("cannot train on an empty dataset");
  if (hyper_grid.empty()) throw ValidationError("hyperparameter grid is empty");
  const gp::Matrix<double> x = dataset.features();
  const gp::Vector<double> y = dataset.labels();
  gp::RbfParams<double> params = hyper_grid.front();
  if (dataset.size() >= 3) {
    const auto [xs, ys] = rows(x, y, even_subsample(dataset.size(), std::max<std::size_t>(3, options.max_select_points)));
    params = gp::select_hyperparams(xs, ys, hyper_grid);
  }
  const auto [xf, yf] = rows(x, y, even_subsample(dataset.size(), std::max<std::size_t>(1, options.max_fit_points)));
  return gp::fit(xf, yf, params);
}

std::vector<SurpriseEstimate> predict_along(const gp::GpModel<double>& model, const ForecastGrid& grid,
                                            const Trajectory& traj) {
  std::vector<const FlightState*> ascent;
  for (const auto& s : traj.states) {
    if (s.phase == Phase::Ascent) ascent.push_back(&s);
  }
  std::vector<SurpriseEstimate> out;
  if (ascent.empty()) return out;
  gp::Matrix<double> q(static_cast<Eigen::Index>(ascent.size()), 4);
  for (std::size_t i = 0; i < ascent.size(); ++i) {
    const FlightState& s = *ascent[i];
    const AtmoSample a = interpolate(grid, s.time, s.lat, s.lon, s.alt);
    q.row(static_cast<Eigen::Index>(i)) << s.alt, a.wind_u, a.wind_v, a.pressure;
  }
  const auto pred = gp::predict(model, q);
  for (std::size_t i = 0; i < ascent.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out.push_back({ascent[i]->alt, pred.mean[k], pred.variance[k]});
  }
  return out;
}

std::string format_dataset(const SurpriseDataset& dataset) {
  std::string out = kDatasetCsvHeader;
  out += '\n';
  for (const auto& s : dataset.samples) {
    for (int c = 0; c < 4; ++c) {
      out += csv::format_double(s.features[c]);
      out += ',';
    }
    out += csv::format_double(s.label);
    out += '\n';
  }
  return out;
}

SurpriseDataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  SurpriseDataset ds;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::is_comment_or_blank(line)) continue;
    if (!header) {
      if (line != kDatasetCsvHeader) throw ParseError("unexpected dataset header '" + line + "'");
      header = true;
      continue;
    }
    const auto f = csv::split(line);
    const std::string ctx = "dataset line " + std::to_string(line_no);
    if (f.size() != 5) throw ParseError(ctx + ": expected 5 columns");
    SurpriseSample s;
    for (int c = 0; c < 4; ++c) s.features[c] = csv::parse_double(f[static_cast<std::size_t>(c)], ctx);
    s.label = csv::parse_double(f[4], ctx);
    if (!s.features.allFinite() || !std::isfinite(s.label)) throw InvalidData(ctx + ": non-finite value");
    if (s.label < 0.0) throw ValidationError(ctx + ": negative surprise");
    ds.samples.push_back(s);
  }
  if (!header) throw ParseError("dataset file has no header");
  return ds;
}

void save_dataset(const SurpriseDataset& dataset, const std::filesystem::path& path) {
  csv::write_text(path, format_dataset(dataset));
}

SurpriseDataset load_dataset(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : csv::read_lines(path)) text += l + "\n";
  return parse_dataset(text);
}

}  // namespace minisonde

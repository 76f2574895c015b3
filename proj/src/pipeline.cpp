#include "minisonde/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"
#include "minisonde/gp_io.hpp"
#include "minisonde/random.hpp"

namespace minisonde {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_flights(std::size_t count, double fraction,
                                                                             std::uint64_t seed) {
  std::vector<std::size_t> ids(count);
  for (std::size_t i = 0; i < count; ++i) ids[i] = i;
  Rng rng(seed);
  for (std::size_t i = count; i > 1; --i) std::swap(ids[i - 1], ids[rng.index(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(count) * fraction));
  std::vector<std::size_t> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::vector<ProfilePoint> surprise_profile(const gp::GpModel<double>& model, const ForecastGrid& grid,
                                           const Trajectory& traj) {
  std::vector<ProfilePoint> profile;
  for (const auto& e : predict_along(model, grid, traj)) profile.push_back({e.altitude, e.mean});
  return profile;
}

namespace {

template <typename Fn>
auto stage(const char* name, std::ostream& log, Fn&& fn) {
  log << "[" << name << "]\n";
  try {
    return fn();
  } catch (const Error& e) {
    throw_error(e.kind(), std::string("stage '") + name + "': " + e.detail());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { csv::write_text(path, j.dump(2) + "\n"); }

std::string tracks_csv(const ExperimentResult& r) {
  std::string out = "track,time_s,lat_deg,lon_deg,alt_m,wind_u_ms,wind_v_ms,pressure_hpa,phase\n";
  auto emit = [&out](const std::string& name, const Trajectory& t) {
    for (const auto& s : t.states) {
      out += name;
      for (double v : {s.time, s.lat, s.lon, s.alt, s.sample.wind_u, s.sample.wind_v, s.sample.pressure}) {
        out += ',';
        out += csv::format_double(v);
      }
      out += ',';
      out += to_string(s.phase);
      out += '\n';
    }
  };
  emit("truth", r.truth_track);
  emit("base", r.base_track);
  emit("refined", r.refined_track);
  for (std::size_t k = 0; k < r.minisonde_tracks.size(); ++k) emit("minisonde-" + std::to_string(k + 1), r.minisonde_tracks[k]);
  return out;
}

}  // namespace

std::vector<std::string> pipeline_outputs(const RunConfig& cfg) {
  std::vector<std::string> files = {"config.json",        "surprise_train.csv", "surprise_test.csv", "surprise_model.json",
                                    "correlation.json",   "correlation.txt",    "scatter.csv",       "target_track.csv",
                                    "profile.csv",        "plan.json",          "plan.txt",          "observations.csv",
                                    "refined.json",       "rms.json",           "rms.txt",           "tracks.csv",
                                    "summary.json"};
  if (cfg.write_grids) {
    for (const char* g : {"lagged_grid.csv", "base_grid.csv", "truth_grid.csv"}) files.emplace_back(g);
  }
  return files;
}

PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  const std::uint64_t seed = stage("config", log, [&] {
    if (!std::filesystem::is_directory(out_dir)) throw IoError("output directory '" + out_dir.string() + "' does not exist");
    return cfg.require_seed();
  });
  PipelineResult result;

  auto grids = stage("grids", log, [&] {
    ScenarioGrids g = make_scenario_grids(cfg);
    if (cfg.write_grids) {
      save_grid(g.lagged, out_dir / "lagged_grid.csv");
      save_grid(g.base, out_dir / "base_grid.csv");
      save_grid(g.truth, out_dir / "truth_grid.csv");
    }
    return std::make_shared<ScenarioGrids>(std::move(g));
  });
  const auto base = std::make_shared<const ForecastGrid>(grids->base);

  const auto flights = scheduled_flights(cfg);
  const SurpriseDataset dataset = stage("dataset", log, [&] {
    return build_dataset(grids->lagged, grids->base, flights, {cfg.lag_s, cfg.dataset_stride});
  });

  const auto [train_ids, test_ids] = split_flights(flights.size(), cfg.train_fraction, substream_seed(seed, "split"));
  const SurpriseDataset train_set = select_flights(dataset, train_ids);
  const SurpriseDataset test_set = select_flights(dataset, test_ids);
  result.train_flights = train_ids.size();
  result.test_flights = test_ids.size();
  result.train_samples = train_set.size();
  result.test_samples = test_set.size();
  log << "  " << result.train_flights << " training flights (" << result.train_samples << " samples), "
      << result.test_flights << " held-out flights (" << result.test_samples << " samples)\n";

  const gp::GpModel<double> model = stage("train", log, [&] {
    return train_surprise_model(train_set, cfg.surprise_grid.expand(4), cfg.train);
  });

  stage("correlation", log, [&] {
    try {
      result.correlation = surprise_correlation(model, test_set);
      log << "  held-out Pearson r = " << result.correlation->pearson_r << "\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateCorrelation) throw;
      result.correlation_warning = e.what();
      log << "  warning: " << e.what() << "\n";
    }
    return 0;
  });

  const FlightParams target = flights[cfg.target_index()];
  const Trajectory planned = stage("plan", log, [&] {
    Trajectory t = simulate_ascent(*base, target);
    t.require_complete();
    result.profile = surprise_profile(model, *base, t);
    result.plan = plan_drops(result.profile, cfg.budget, target.burst_altitude, cfg.band_floor());
    return t;
  });

  result.experiment = stage("refine", log, [&] {
    ExperimentOptions opts;
    opts.noise = cfg.noise;
    opts.noise_seed = substream_seed(seed, "noise");
    opts.obs_stride = cfg.obs_stride;
    opts.hyper_grid = cfg.refine_grid.expand(3);
    opts.refine = cfg.refine;
    return run_refinement_experiment(grids->truth, base, target, result.plan, opts);
  });
  log << "  endpoint error: base " << result.experiment.base_error_m << " m, refined "
      << result.experiment.refined_error_m << " m\n";

  stage("write", log, [&] {
    write_json(out_dir / "config.json", config_to_json(cfg));
    save_dataset(train_set, out_dir / "surprise_train.csv");
    save_dataset(test_set, out_dir / "surprise_test.csv");
    write_json(out_dir / "surprise_model.json", gp::to_json(model));
    if (result.correlation) {
      write_json(out_dir / "correlation.json", correlation_to_json(*result.correlation));
      csv::write_text(out_dir / "correlation.txt", correlation_text(*result.correlation));
      csv::write_text(out_dir / "scatter.csv", scatter_csv(*result.correlation));
    } else {
      write_json(out_dir / "correlation.json", {{"pearson_r", nullptr}, {"n", test_set.size()}, {"warning", result.correlation_warning}});
      csv::write_text(out_dir / "correlation.txt", "Surprise model: correlation undefined (" + result.correlation_warning + ")\n");
      csv::write_text(out_dir / "scatter.csv", "predicted_surprise,true_surprise\n");
    }
    save_trajectory(planned, out_dir / "target_track.csv");
    csv::write_text(out_dir / "profile.csv", format_profile(result.profile));
    write_json(out_dir / "plan.json", plan_to_json(result.plan));
    csv::write_text(out_dir / "plan.txt", plan_report(result.plan));
    save_observations(result.experiment.observations, out_dir / "observations.csv");
    write_json(out_dir / "refined.json", refined_to_json(*result.experiment.refined, "base_grid.csv"));
    write_json(out_dir / "rms.json", rms_to_json(result.experiment.rms));
    csv::write_text(out_dir / "rms.txt", rms_table(result.experiment.rms));
    csv::write_text(out_dir / "tracks.csv", tracks_csv(result.experiment));
    nlohmann::json summary = {
        {"train_flights", result.train_flights},
        {"test_flights", result.test_flights},
        {"train_samples", result.train_samples},
        {"test_samples", result.test_samples},
        {"pearson_r", result.correlation ? nlohmann::json(result.correlation->pearson_r) : nlohmann::json(nullptr)},
        {"target_flight", cfg.target_index()},
        {"drops_m", nlohmann::json::array()},
        {"base_endpoint_error_m", result.experiment.base_error_m},
        {"refined_endpoint_error_m", result.experiment.refined_error_m},
        {"rms", rms_to_json(result.experiment.rms)}};
    for (const auto& d : result.plan.drops) summary["drops_m"].push_back(d.altitude);
    write_json(out_dir / "summary.json", summary);
    return 0;
  });
  return result;
}

}  // namespace minisonde

#include "minisonde/config.hpp"

#include <fstream>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"
#include "minisonde/random.hpp"

namespace minisonde {

using nlohmann::json;

GridAxes GridConfig::axes() const {
  GridAxes a;
  a.times = make_axis(time_start, time_end, time_step);
  a.altitudes = make_axis(alt_min, alt_max, alt_step);
  a.lats = make_axis(lat_min, lat_max, lat_step);
  a.lons = make_axis(lon_min, lon_max, lon_step);
  a.validate();
  return a;
}

std::vector<gp::RbfParams<double>> HyperGridSpec::expand(Eigen::Index dim) const {
  auto grid = gp::make_hyper_grid<double>(dim, signal_variances, length_scales, noise_variances);
  if (grid.empty()) throw ValidationError("hyperparameter grid lists must be non-empty");
  for (const auto& p : grid) gp::validate(p);
  return grid;
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ValidationError("a seed is required (set \"seed\" in the config or pass --seed)");
  return *seed;
}

std::size_t RunConfig::target_index() const {
  const std::size_t idx = target_flight.value_or(flights.count / 2);
  if (idx >= flights.count) throw ValidationError("target_flight is outside the flight schedule");
  return idx;
}

SyntheticSpec standard_synthetic_spec() {
  SyntheticSpec s;
  s.shear = {{0.0, 5.0, 1.0},      {5000.0, 14.0, 2.0},  {11000.0, 30.0, 4.0},
             {16000.0, 16.0, 1.0}, {22000.0, 8.0, -2.0}, {30000.0, 12.0, 0.0}};
  s.modes = {{3.0, 800000.0, ModeAxis::East}, {2.0, 12000.0, ModeAxis::Up}};
  s.noise = {4.0, 500000.0, 4000.0, 172800.0};
  s.pressure_rel_amplitude = 0.003;
  return s;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.synthetic = standard_synthetic_spec();
  cfg.flight.launch = {0.0, 40.0, -103.0, 0.0};
  return cfg;
}

namespace {

void read_hyper(const json& j, HyperGridSpec& h) {
  h.signal_variances = j.value("signal_variances", h.signal_variances);
  h.length_scales = j.value("length_scales", h.length_scales);
  h.noise_variances = j.value("noise_variances", h.noise_variances);
}

json write_hyper(const HyperGridSpec& h) {
  return {{"signal_variances", h.signal_variances},
          {"length_scales", h.length_scales},
          {"noise_variances", h.noise_variances}};
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg = default_config();
  try {
    if (j.contains("seed") && !j.at("seed").is_null()) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      GridConfig& gc = cfg.grid;
      gc.lat_min = g.value("lat_min", gc.lat_min);
      gc.lat_max = g.value("lat_max", gc.lat_max);
      gc.lat_step = g.value("lat_step", gc.lat_step);
      gc.lon_min = g.value("lon_min", gc.lon_min);
      gc.lon_max = g.value("lon_max", gc.lon_max);
      gc.lon_step = g.value("lon_step", gc.lon_step);
      gc.alt_min = g.value("alt_min", gc.alt_min);
      gc.alt_max = g.value("alt_max", gc.alt_max);
      gc.alt_step = g.value("alt_step", gc.alt_step);
      gc.time_start = g.value("time_start", gc.time_start);
      gc.time_end = g.value("time_end", gc.time_end);
      gc.time_step = g.value("time_step", gc.time_step);
    }
    if (j.contains("synthetic")) cfg.synthetic = j.at("synthetic").get<SyntheticSpec>();
    cfg.issue_time_s = j.value("issue_time_s", cfg.issue_time_s);
    cfg.lag_s = j.value("lag_s", cfg.lag_s);
    cfg.lag_magnitude = j.value("lag_magnitude", cfg.lag_magnitude);
    cfg.truth_magnitude = j.value("truth_magnitude", cfg.truth_magnitude);
    if (j.contains("flight")) {
      const json& f = j.at("flight");
      FlightParams& fp = cfg.flight;
      fp.ascent_rate = f.value("ascent_rate", fp.ascent_rate);
      fp.burst_altitude = f.value("burst_altitude", fp.burst_altitude);
      fp.payload_descent_rate = f.value("payload_descent_rate", fp.payload_descent_rate);
      fp.minisonde_descent_rate = f.value("minisonde_descent_rate", fp.minisonde_descent_rate);
      fp.time_step = f.value("time_step", fp.time_step);
      if (f.contains("launch")) {
        const json& l = f.at("launch");
        fp.launch.time = l.value("time_s", fp.launch.time);
        fp.launch.lat = l.value("lat_deg", fp.launch.lat);
        fp.launch.lon = l.value("lon_deg", fp.launch.lon);
        fp.launch.alt = l.value("alt_m", fp.launch.alt);
      }
    }
    if (j.contains("flights")) {
      const json& f = j.at("flights");
      cfg.flights.count = f.value("count", cfg.flights.count);
      cfg.flights.interval_s = f.value("interval_s", cfg.flights.interval_s);
      cfg.flights.first_launch_s = f.value("first_launch_s", cfg.flights.first_launch_s);
    }
    cfg.dataset_stride = j.value("dataset_stride", cfg.dataset_stride);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    if (j.contains("train")) {
      cfg.train.max_select_points = j.at("train").value("max_select_points", cfg.train.max_select_points);
      cfg.train.max_fit_points = j.at("train").value("max_fit_points", cfg.train.max_fit_points);
    }
    if (j.contains("surprise_grid")) read_hyper(j.at("surprise_grid"), cfg.surprise_grid);
    if (j.contains("refine_grid")) read_hyper(j.at("refine_grid"), cfg.refine_grid);
    cfg.budget = j.value("budget", cfg.budget);
    if (j.contains("band_floor_m") && !j.at("band_floor_m").is_null()) cfg.band_floor_m = j.at("band_floor_m").get<double>();
    if (j.contains("target_flight") && !j.at("target_flight").is_null()) {
      cfg.target_flight = j.at("target_flight").get<std::size_t>();
    }
    if (j.contains("observation_noise")) {
      cfg.noise.wind_ms = j.at("observation_noise").value("wind_ms", cfg.noise.wind_ms);
      cfg.noise.pressure_hpa = j.at("observation_noise").value("pressure_hpa", cfg.noise.pressure_hpa);
    }
    cfg.obs_stride = j.value("obs_stride", cfg.obs_stride);
    if (j.contains("refine")) {
      const json& r = j.at("refine");
      cfg.refine.noise_floor = r.value("noise_floor", cfg.refine.noise_floor);
      cfg.refine.stride = r.value("stride", cfg.refine.stride);
      cfg.refine.max_select_points = r.value("max_select_points", cfg.refine.max_select_points);
      cfg.refine.max_fit_points = r.value("max_fit_points", cfg.refine.max_fit_points);
    }
    cfg.write_grids = j.value("write_grids", cfg.write_grids);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  cfg.flight.validate();
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) throw ValidationError("train_fraction must be in (0, 1)");
  if (cfg.flights.count < 1 || !(cfg.flights.interval_s > 0.0)) throw ValidationError("bad flight schedule");
  if (cfg.dataset_stride < 1 || cfg.obs_stride < 1) throw ValidationError("strides must be >= 1");
  if (!(cfg.lag_magnitude >= 0.0) || !(cfg.truth_magnitude >= 0.0)) throw ValidationError("magnitudes must be >= 0");
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  const GridConfig& g = cfg.grid;
  j["grid"] = {{"lat_min", g.lat_min},       {"lat_max", g.lat_max},       {"lat_step", g.lat_step},
               {"lon_min", g.lon_min},       {"lon_max", g.lon_max},       {"lon_step", g.lon_step},
               {"alt_min", g.alt_min},       {"alt_max", g.alt_max},       {"alt_step", g.alt_step},
               {"time_start", g.time_start}, {"time_end", g.time_end},     {"time_step", g.time_step}};
  j["synthetic"] = cfg.synthetic;
  j["issue_time_s"] = cfg.issue_time_s;
  j["lag_s"] = cfg.lag_s;
  j["lag_magnitude"] = cfg.lag_magnitude;
  j["truth_magnitude"] = cfg.truth_magnitude;
  const FlightParams& f = cfg.flight;
  j["flight"] = {{"ascent_rate", f.ascent_rate},
                 {"burst_altitude", f.burst_altitude},
                 {"payload_descent_rate", f.payload_descent_rate},
                 {"minisonde_descent_rate", f.minisonde_descent_rate},
                 {"time_step", f.time_step},
                 {"launch", {{"time_s", f.launch.time}, {"lat_deg", f.launch.lat}, {"lon_deg", f.launch.lon}, {"alt_m", f.launch.alt}}}};
  j["flights"] = {{"count", cfg.flights.count},
                  {"interval_s", cfg.flights.interval_s},
                  {"first_launch_s", cfg.flights.first_launch_s}};
  j["dataset_stride"] = cfg.dataset_stride;
  j["train_fraction"] = cfg.train_fraction;
  j["train"] = {{"max_select_points", cfg.train.max_select_points}, {"max_fit_points", cfg.train.max_fit_points}};
  j["surprise_grid"] = write_hyper(cfg.surprise_grid);
  j["refine_grid"] = write_hyper(cfg.refine_grid);
  j["budget"] = cfg.budget;
  j["band_floor_m"] = cfg.band_floor_m ? json(*cfg.band_floor_m) : json(nullptr);
  j["target_flight"] = cfg.target_flight ? json(*cfg.target_flight) : json(nullptr);
  j["observation_noise"] = {{"wind_ms", cfg.noise.wind_ms}, {"pressure_hpa", cfg.noise.pressure_hpa}};
  j["obs_stride"] = cfg.obs_stride;
  j["refine"] = {{"noise_floor", cfg.refine.noise_floor},
                 {"stride", cfg.refine.stride},
                 {"max_select_points", cfg.refine.max_select_points},
                 {"max_fit_points", cfg.refine.max_fit_points}};
  j["write_grids"] = cfg.write_grids;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::vector<FlightParams> scheduled_flights(const RunConfig& cfg) {
  std::vector<FlightParams> flights;
  flights.reserve(cfg.flights.count);
  for (std::size_t i = 0; i < cfg.flights.count; ++i) {
    FlightParams f = cfg.flight;
    f.launch.time = cfg.flights.first_launch_s + static_cast<double>(i) * cfg.flights.interval_s;
    flights.push_back(f);
  }
  return flights;
}

ScenarioGrids make_scenario_grids(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.require_seed();
  const GridAxes axes = cfg.grid.axes();
  ForecastGrid base = generate_synthetic(substream_seed(seed, "grid"), axes, cfg.synthetic).with_issue_time(cfg.issue_time_s);
  ForecastGrid lagged =
      perturb_grid(base, substream_seed(seed, "lag"), cfg.lag_magnitude).with_issue_time(cfg.issue_time_s - cfg.lag_s);
  ForecastGrid truth = perturb_grid(base, substream_seed(seed, "truth"), cfg.truth_magnitude);
  return {std::move(lagged), std::move(base), std::move(truth)};
}

}  // namespace minisonde

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "minisonde/config.hpp"
#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"
#include "minisonde/evaluation.hpp"
#include "minisonde/gp_io.hpp"
#include "minisonde/pipeline.hpp"
#include "minisonde/random.hpp"
#include "minisonde/refinement.hpp"
#include "minisonde/scheduler.hpp"
#include "minisonde/surprise.hpp"
#include "minisonde/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace minisonde;

namespace {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
      return kIo;
    case ErrorKind::NotPositiveDefinite:
      return kNumerical;
    default:
      return kValidation;
  }
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed) cfg.seed = g.seed;
  cfg.require_seed();
  return cfg;
}

fs::path output_dir(const Globals& g) {
  const fs::path out(g.out);
  if (!fs::is_directory(out)) throw IoError("output directory '" + out.string() + "' does not exist");
  return out;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " '" + path + "' does not exist");
}

json read_json(const std::string& path) {
  require_file(path, "input file");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { csv::write_text(path, j.dump(2) + "\n"); }

FlightParams target_flight(const RunConfig& cfg) { return scheduled_flights(cfg)[cfg.target_index()]; }

// --- subcommands ---------------------------------------------------------

struct GenForecastArgs {
  std::string spec_path;
};

void cmd_gen_forecast(const Globals& g, const GenForecastArgs& a) {
  RunConfig cfg = resolve_config(g);
  const fs::path out = output_dir(g);
  if (!a.spec_path.empty()) {
    try {
      cfg.synthetic = read_json(a.spec_path).get<SyntheticSpec>();
    } catch (const json::exception& e) {
      throw ValidationError("bad synthetic spec: " + std::string(e.what()));
    }
  }
  const ScenarioGrids grids = make_scenario_grids(cfg);
  save_grid(grids.base, out / "base_grid.csv");
  save_grid(grids.lagged, out / "lagged_grid.csv");
  save_grid(grids.truth, out / "truth_grid.csv");
}

struct SimulateArgs {
  std::string grid;
  std::optional<std::size_t> flight;
  bool ascent_only = false;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const RunConfig cfg = resolve_config(g);
  const fs::path out = output_dir(g);
  require_file(a.grid, "grid");
  const ForecastGrid grid = load_grid(a.grid);
  const auto flights = scheduled_flights(cfg);
  const std::size_t idx = a.flight.value_or(cfg.target_index());
  if (idx >= flights.size()) throw ValidationError("flight index is outside the flight schedule");
  const Trajectory t = a.ascent_only ? simulate_ascent(grid, flights[idx]) : simulate_flight(grid, flights[idx]);
  save_trajectory(t, out / "trajectory.csv");
  t.require_complete();
}

struct BuildDatasetArgs {
  std::string old_grid;
  std::string new_grid;
};

void cmd_build_dataset(const Globals& g, const BuildDatasetArgs& a) {
  const RunConfig cfg = resolve_config(g);
  const fs::path out = output_dir(g);
  require_file(a.old_grid, "grid");
  require_file(a.new_grid, "grid");
  const ForecastGrid old_grid = load_grid(a.old_grid);
  const ForecastGrid new_grid = load_grid(a.new_grid);
  const auto flights = scheduled_flights(cfg);
  const SurpriseDataset ds = build_dataset(old_grid, new_grid, flights, {cfg.lag_s, cfg.dataset_stride});
  const auto [train_ids, test_ids] =
      split_flights(flights.size(), cfg.train_fraction, substream_seed(cfg.require_seed(), "split"));
  save_dataset(ds, out / "dataset.csv");
  save_dataset(select_flights(ds, train_ids), out / "surprise_train.csv");
  save_dataset(select_flights(ds, test_ids), out / "surprise_test.csv");
}

struct TrainArgs {
  std::string dataset;
};

void cmd_train_surprise(const Globals& g, const TrainArgs& a) {
  const RunConfig cfg = resolve_config(g);
  const fs::path out = output_dir(g);
  require_file(a.dataset, "dataset");
  const SurpriseDataset ds = load_dataset(a.dataset);
  const auto model = train_surprise_model(ds, cfg.surprise_grid.expand(4), cfg.train);
  write_json(out / "surprise_model.json", gp::to_json(model));
}

struct PlanArgs {
  std::string profile;
  std::string model;
  std::string grid;
  std::optional<int> budget;
};

void cmd_plan(const Globals& g, const PlanArgs& a) {
  const RunConfig cfg = resolve_config(g);
  const fs::path out = output_dir(g);
  const FlightParams target = target_flight(cfg);
  std::vector<ProfilePoint> profile;
  if (!a.profile.empty()) {
    require_file(a.profile, "profile");
    profile = load_profile(a.profile);
  } else {
    if (a.model.empty() || a.grid.empty()) throw ValidationError("plan needs --profile, or --model together with --grid");
    require_file(a.grid, "grid");
    const auto model = gp::model_from_json(read_json(a.model));
    const ForecastGrid grid = load_grid(a.grid);
    Trajectory t = simulate_ascent(grid, target);
    t.require_complete();
    profile = surprise_profile(model, grid, t);
    save_trajectory(t, out / "target_track.csv");
    csv::write_text(out / "profile.csv", format_profile(profile));
  }
  const DeploymentPlan plan = plan_drops(profile, a.budget.value_or(cfg.budget), target.burst_altitude, cfg.band_floor());
  write_json(out / "plan.json", plan_to_json(plan));
  csv::write_text(out / "plan.txt", plan_report(plan));
}

struct RefineArgs {
  std::string grid;
  std::string observations;
  bool repredict = false;
};

void cmd_refine(const Globals& g, const RefineArgs& a) {
  const RunConfig cfg = resolve_config(g);
  const fs::path out = output_dir(g);
  require_file(a.grid, "grid");
  require_file(a.observations, "observation file");
  const auto base = std::make_shared<const ForecastGrid>(load_grid(a.grid));
  const auto obs = load_observations(a.observations);
  if (obs.empty()) std::cerr << "warning: no observations; the refined forecast equals the base forecast\n";
  const RefinedForecast rf = refine(base, obs, cfg.refine_grid.expand(3), cfg.refine);
  write_json(out / "refined.json", refined_to_json(rf, a.grid));
  if (a.repredict) {
    const Trajectory t = repredict_trajectory(rf, target_flight(cfg));
    save_trajectory(t, out / "refined_track.csv");
    t.require_complete();
  }
}

struct EvaluateArgs {
  std::string truth;
  std::string original;
  std::string refined;
  std::string model;
  std::string dataset;
};

std::vector<AtmoSample> track_samples(const std::string& path) {
  require_file(path, "trajectory");
  std::vector<AtmoSample> v;
  for (const auto& s : load_trajectory(path).states) v.push_back(s.sample);
  return v;
}

void cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
  resolve_config(g);
  const fs::path out = output_dir(g);
  const bool rms_mode = !a.truth.empty();
  const bool corr_mode = !a.model.empty();
  if (rms_mode == corr_mode) {
    throw ValidationError("evaluate needs either --truth/--original/--refined or --model/--dataset");
  }
  if (rms_mode) {
    if (a.original.empty() || a.refined.empty()) throw ValidationError("--truth requires --original and --refined");
    const auto truth = track_samples(a.truth);
    RmsReport report;
    report.original = rms_error(track_samples(a.original), truth);
    report.refined = rms_error(track_samples(a.refined), truth);
    report.count = truth.size();
    write_json(out / "rms.json", rms_to_json(report));
    csv::write_text(out / "rms.txt", rms_table(report));
    return;
  }
  if (a.dataset.empty()) throw ValidationError("--model requires --dataset");
  require_file(a.dataset, "dataset");
  const auto model = gp::model_from_json(read_json(a.model));
  const CorrelationReport report = surprise_correlation(model, load_dataset(a.dataset));
  write_json(out / "correlation.json", correlation_to_json(report));
  csv::write_text(out / "correlation.txt", correlation_text(report));
  csv::write_text(out / "scatter.csv", scatter_csv(report));
}

void cmd_pipeline(const Globals& g) {
  const RunConfig cfg = resolve_config(g);
  run_pipeline(cfg, fs::path(g.out), std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minisonde mission simulator: forecasts, surprise model, drop planning and refinement"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--seed", g.seed, "root seed (overrides the config)");
  app.add_option("--out", g.out, "existing output directory")->capture_default_str();

  GenForecastArgs gen;
  auto* c_gen = app.add_subcommand("gen-forecast", "write base, lagged and truth grid CSVs");
  c_gen->add_option("--spec", gen.spec_path, "synthetic spec JSON (defaults to the config's)");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate a flight over a grid");
  c_sim->add_option("--grid", sim.grid, "grid CSV")->required();
  c_sim->add_option("--flight", sim.flight, "scheduled flight index (defaults to the target flight)");
  c_sim->add_flag("--ascent-only", sim.ascent_only, "stop at burst");

  BuildDatasetArgs bd;
  auto* c_bd = app.add_subcommand("build-dataset", "surprise dataset from a lagged forecast pair");
  c_bd->add_option("--old", bd.old_grid, "earlier-issued grid CSV")->required();
  c_bd->add_option("--new", bd.new_grid, "later-issued grid CSV")->required();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train-surprise", "fit the surprise GP");
  c_tr->add_option("--dataset", tr.dataset, "dataset CSV")->required();

  PlanArgs pl;
  auto* c_pl = app.add_subcommand("plan", "schedule minisonde drops for the target flight");
  c_pl->add_option("--profile", pl.profile, "surprise profile CSV");
  c_pl->add_option("--model", pl.model, "surprise model JSON");
  c_pl->add_option("--grid", pl.grid, "forecast grid CSV");
  c_pl->add_option("--budget", pl.budget, "number of minisondes (overrides the config)");

  RefineArgs rf;
  auto* c_rf = app.add_subcommand("refine", "residual GP refinement of a grid from observations");
  c_rf->add_option("--grid", rf.grid, "base grid CSV")->required();
  c_rf->add_option("--obs", rf.observations, "observation CSV")->required();
  c_rf->add_flag("--repredict", rf.repredict, "also write the re-predicted target ascent");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "RMS errors of tracks or correlation of a surprise model");
  c_ev->add_option("--truth", ev.truth, "trajectory CSV with true samples");
  c_ev->add_option("--original", ev.original, "trajectory CSV with original forecast samples");
  c_ev->add_option("--refined", ev.refined, "trajectory CSV with refined forecast samples");
  c_ev->add_option("--model", ev.model, "surprise model JSON");
  c_ev->add_option("--dataset", ev.dataset, "held-out dataset CSV");

  auto* c_pipe = app.add_subcommand("pipeline", "run every stage and write all reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (c_gen->parsed()) cmd_gen_forecast(g, gen);
    else if (c_sim->parsed()) cmd_simulate(g, sim);
    else if (c_bd->parsed()) cmd_build_dataset(g, bd);
    else if (c_tr->parsed()) cmd_train_surprise(g, tr);
    else if (c_pl->parsed()) cmd_plan(g, pl);
    else if (c_rf->parsed()) cmd_refine(g, rf);
    else if (c_ev->parsed()) cmd_evaluate(g, ev);
    else if (c_pipe->parsed()) cmd_pipeline(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

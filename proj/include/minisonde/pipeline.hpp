#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "minisonde/config.hpp"
#include "minisonde/evaluation.hpp"
#include "minisonde/scheduler.hpp"

namespace minisonde {

/// Seeded shuffle of flight indices; the first round(count * fraction) train.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_flights(std::size_t count, double fraction,
                                                                             std::uint64_t seed);

/// (altitude, predicted mean) along the ascent, in the order the scheduler expects.
std::vector<ProfilePoint> surprise_profile(const gp::GpModel<double>& model, const ForecastGrid& grid,
                                           const Trajectory& traj);

struct PipelineResult {
  std::size_t train_flights = 0;
  std::size_t test_flights = 0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::optional<CorrelationReport> correlation;
  std::string correlation_warning;
  std::vector<ProfilePoint> profile;
  DeploymentPlan plan;
  ExperimentResult experiment;
};

/// End to end: scenario grids, hourly flights, surprise dataset from the lagged
/// pair, seeded split, training, held-out correlation, drop plan for the target
/// flight and the refinement experiment. Writes every report into `out_dir`.
/// Errors are re-raised with the failing stage named in the message.
PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// Files written by run_pipeline, relative to the output directory.
std::vector<std::string> pipeline_outputs(const RunConfig& cfg);

}  // namespace minisonde

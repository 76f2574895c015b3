#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace minisonde {

struct ProfilePoint {
  double altitude = 0.0;
  double surprise = 0.0;
};

struct Band {
  double low = 0.0;
  double high = 0.0;
};

struct Drop {
  double altitude = 0.0;
  double surprise = 0.0;
  std::size_t band = 0;
};

/// Release altitudes, at most one per band, sorted by altitude.
struct DeploymentPlan {
  std::vector<Drop> drops;
  int budget = 0;
  std::vector<Band> bands;
};

/// Splits [min_altitude, burst_altitude] into `budget` equal bands (the last one
/// closed on top) and picks the profile point of maximal surprise in each,
/// lowest altitude on ties. Bands without profile points get no drop.
/// Profile altitudes must be strictly increasing.
DeploymentPlan plan_drops(const std::vector<ProfilePoint>& profile, int budget, double burst_altitude,
                          double min_altitude);

/// Deterministic human-readable summary of a plan.
std::string plan_report(const DeploymentPlan& plan);

nlohmann::json plan_to_json(const DeploymentPlan& plan);
DeploymentPlan plan_from_json(const nlohmann::json& j);

inline constexpr const char* kProfileCsvHeader = "alt_m,surprise";

std::string format_profile(const std::vector<ProfilePoint>& profile);
std::vector<ProfilePoint> parse_profile(const std::string& text);
std::vector<ProfilePoint> load_profile(const std::filesystem::path& path);

}  // namespace minisonde

#include "minisonde/scheduler.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"

namespace minisonde {

DeploymentPlan plan_drops(const std::vector<ProfilePoint>& profile, int budget, double burst_altitude,
                          double min_altitude) {
  if (budget < 1) throw InvalidBudget("budget must be >= 1, got " + std::to_string(budget));
  if (profile.empty()) throw EmptyProfile("surprise profile is empty");
  if (!(burst_altitude > min_altitude)) throw ValidationError("burst altitude must exceed the band floor");
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!std::isfinite(profile[i].altitude) || !std::isfinite(profile[i].surprise)) {
      throw InvalidData("non-finite profile point");
    }
    if (i > 0 && !(profile[i].altitude > profile[i - 1].altitude)) {
      throw ValidationError("profile altitudes must be strictly increasing");
    }
  }

  DeploymentPlan plan;
  plan.budget = budget;
  const double width = (burst_altitude - min_altitude) / budget;
  for (int b = 0; b < budget; ++b) {
    const double low = min_altitude + width * b;
    const double high = (b == budget - 1) ? burst_altitude : min_altitude + width * (b + 1);
    plan.bands.push_back({low, high});
  }

  std::vector<std::optional<std::size_t>> best(plan.bands.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double alt = profile[i].altitude;
    if (alt < min_altitude || alt > burst_altitude) continue;
    std::size_t b = 0;
    while (b + 1 < plan.bands.size() && alt >= plan.bands[b].high) ++b;
    // Altitudes increase, so a strict comparison keeps the lowest on ties.
    if (!best[b] || profile[i].surprise > profile[*best[b]].surprise) best[b] = i;
  }
  for (std::size_t b = 0; b < best.size(); ++b) {
    if (best[b]) plan.drops.push_back({profile[*best[b]].altitude, profile[*best[b]].surprise, b});
  }
  return plan;
}

std::string plan_report(const DeploymentPlan& plan) {
  std::ostringstream out;
  char buf[160];
  out << "Minisonde deployment plan\n";
  out << "budget: " << plan.budget << "\n";
  out << "scheduled drops: " << plan.drops.size() << " of " << plan.budget << "\n";
  out << "bands:\n";
  for (std::size_t b = 0; b < plan.bands.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "  band %zu: [%.1f m, %.1f m%s\n", b, plan.bands[b].low, plan.bands[b].high,
                  b + 1 == plan.bands.size() ? "]" : ")");
    out << buf;
  }
  if (plan.drops.empty()) {
    out << "no drops scheduled\n";
  } else {
    out << "drops:\n";
    for (const auto& d : plan.drops) {
      std::snprintf(buf, sizeof(buf), "  drop at %.1f m (band %zu), predicted surprise %.6f\n", d.altitude, d.band,
                    d.surprise);
      out << buf;
    }
  }
  return out.str();
}

nlohmann::json plan_to_json(const DeploymentPlan& plan) {
  nlohmann::json j;
  j["budget"] = plan.budget;
  j["bands"] = nlohmann::json::array();
  for (const auto& b : plan.bands) j["bands"].push_back({{"low_m", b.low}, {"high_m", b.high}});
  j["drops"] = nlohmann::json::array();
  for (const auto& d : plan.drops) j["drops"].push_back({{"alt_m", d.altitude}, {"surprise", d.surprise}, {"band", d.band}});
  return j;
}

DeploymentPlan plan_from_json(const nlohmann::json& j) {
  try {
    DeploymentPlan plan;
    plan.budget = j.at("budget").get<int>();
    for (const auto& b : j.at("bands")) plan.bands.push_back({b.at("low_m").get<double>(), b.at("high_m").get<double>()});
    for (const auto& d : j.at("drops")) {
      plan.drops.push_back({d.at("alt_m").get<double>(), d.at("surprise").get<double>(), d.at("band").get<std::size_t>()});
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad plan document: ") + e.what());
  }
}

std::string format_profile(const std::vector<ProfilePoint>& profile) {
  std::string out = kProfileCsvHeader;
  out += '\n';
  for (const auto& p : profile) out += csv::format_double(p.altitude) + "," + csv::format_double(p.surprise) + "\n";
  return out;
}

std::vector<ProfilePoint> parse_profile(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ProfilePoint> profile;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::is_comment_or_blank(line)) continue;
    if (!header) {
      if (line != kProfileCsvHeader) throw ParseError("unexpected profile header '" + line + "'");
      header = true;
      continue;
    }
    const auto f = csv::split(line);
    const std::string ctx = "profile line " + std::to_string(line_no);
    if (f.size() != 2) throw ParseError(ctx + ": expected 2 columns");
    profile.push_back({csv::parse_double(f[0], ctx), csv::parse_double(f[1], ctx)});
  }
  if (!header) throw ParseError("profile file has no header");
  return profile;
}

std::vector<ProfilePoint> load_profile(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : csv::read_lines(path)) text += l + "\n";
  return parse_profile(text);
}

}  // namespace minisonde

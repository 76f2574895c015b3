#include <doctest.h>

#include <cmath>
#include <string>

#include "minisonde/error.hpp"
#include "minisonde/scheduler.hpp"
#include "support.hpp"

using namespace minisonde;

namespace {

std::vector<double> altitudes(const DeploymentPlan& p) {
  std::vector<double> out;
  for (const auto& d : p.drops) out.push_back(d.altitude);
  return out;
}

}  // namespace

using fixture::random_profile;
using fixture::two_peak_profile;

TEST_CASE("two minisondes land at the two reported altitudes") {
  const DeploymentPlan plan = plan_drops(two_peak_profile(8300.0, 23600.0), 2, 30000.0, 0.0);
  REQUIRE(plan.bands.size() == 2);
  CHECK(plan.bands[0].low == 0.0);
  CHECK(plan.bands[0].high == 15000.0);
  CHECK(plan.bands[1].low == 15000.0);
  CHECK(plan.bands[1].high == 30000.0);
  CHECK(altitudes(plan) == std::vector<double>{8300.0, 23600.0});
  CHECK(plan.drops[0].band == 0);
  CHECK(plan.drops[1].band == 1);
}

TEST_CASE("constant surprise picks the lowest altitude in each band") {
  std::vector<ProfilePoint> prof;
  for (double a = 100.0; a < 30000.0; a += 100.0) prof.push_back({a, 1.0});
  const DeploymentPlan plan = plan_drops(prof, 3, 30000.0, 0.0);
  CHECK(altitudes(plan) == std::vector<double>{100.0, 10000.0, 20000.0});
}

TEST_CASE("monotone increasing surprise picks the top of each band") {
  std::vector<ProfilePoint> prof;
  for (double a = 0.0; a <= 30000.0; a += 70.0) prof.push_back({a, a * 1e-4});
  const DeploymentPlan plan = plan_drops(prof, 3, 30000.0, 0.0);
  const auto expected = oracle::band_argmax(prof, 3, 30000.0, 0.0);
  REQUIRE(plan.drops.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(plan.drops[i].altitude == expected[i].first);
  CHECK(altitudes(plan) == std::vector<double>{9940.0, 19950.0, 29960.0});
}

TEST_CASE("plan_drops agrees with the brute-force band argmax") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto prof = random_profile(rng, 1 + rng.index(150));
    const int budget = 1 + static_cast<int>(rng.index(6));
    const double floor = rng.uniform(0.0, 2000.0);
    const double burst = floor + rng.uniform(5000.0, 40000.0);
    const DeploymentPlan plan = plan_drops(prof, budget, burst, floor);
    const auto expected = oracle::band_argmax(prof, budget, burst, floor);
    REQUIRE(plan.drops.size() == expected.size());
    REQUIRE(plan.bands.size() == static_cast<std::size_t>(budget));
    REQUIRE(plan.drops.size() <= static_cast<std::size_t>(budget));
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const Drop& d = plan.drops[i];
      REQUIRE(d.altitude == expected[i].first);
      REQUIRE(d.band == expected[i].second);
      const Band& b = plan.bands[d.band];
      REQUIRE(d.altitude >= b.low);
      REQUIRE((d.band + 1 == plan.bands.size() ? d.altitude <= b.high : d.altitude < b.high));
      if (i > 0) REQUIRE(d.altitude > plan.drops[i - 1].altitude);
      const bool in_profile =
          std::any_of(prof.begin(), prof.end(), [&](const ProfilePoint& p) { return p.altitude == d.altitude; });
      REQUIRE(in_profile);
    }
    // Bands are equal-width and tile [floor, burst].
    CHECK(plan.bands.front().low == floor);
    CHECK(plan.bands.back().high == burst);
    for (std::size_t b = 1; b < plan.bands.size(); ++b) REQUIRE(plan.bands[b].low == plan.bands[b - 1].high);
  }
}

TEST_CASE("strictly increasing transforms of surprise keep the chosen altitudes") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto prof = random_profile(rng, 120);
    const auto base = altitudes(plan_drops(prof, 3, 30000.0, 0.0));
    for (auto& p : prof) p.surprise = std::exp(2.0 * p.surprise) + p.surprise * p.surprise * p.surprise;
    REQUIRE(altitudes(plan_drops(prof, 3, 30000.0, 0.0)) == base);
  }
}

TEST_CASE("the tie rule depends on altitude, not on which point holds the value") {
  std::vector<ProfilePoint> prof;
  for (double a = 0.0; a < 15000.0; a += 500.0) prof.push_back({a, 0.0});
  // Equal maxima at several altitudes; reassigning them among those altitudes is a no-op.
  for (std::size_t i : {7u, 3u, 20u}) prof[i].surprise = 2.0;
  CHECK(altitudes(plan_drops(prof, 1, 15000.0, 0.0)) == std::vector<double>{1500.0});
  std::swap(prof[3].surprise, prof[20].surprise);
  CHECK(altitudes(plan_drops(prof, 1, 15000.0, 0.0)) == std::vector<double>{1500.0});
}

TEST_CASE("empty bands contribute no drop and points outside the range are ignored") {
  const std::vector<ProfilePoint> prof{{-100.0, 9.0}, {1000.0, 1.0}, {2000.0, 3.0}, {31000.0, 9.0}};
  const DeploymentPlan plan = plan_drops(prof, 3, 30000.0, 0.0);
  CHECK(altitudes(plan) == std::vector<double>{2000.0});
  CHECK(plan.budget == 3);
}

TEST_CASE("plan_drops errors") {
  const auto prof = two_peak_profile(5000.0, 20000.0);
  CHECK_THROWS_AS(plan_drops(prof, 0, 30000.0, 0.0), InvalidBudget);
  CHECK_THROWS_AS(plan_drops({}, 2, 30000.0, 0.0), EmptyProfile);
  CHECK_THROWS_AS(plan_drops({{10.0, 1.0}, {5.0, 1.0}}, 2, 30000.0, 0.0), ValidationError);
  CHECK_THROWS_AS(plan_drops({{10.0, std::nan("")}}, 2, 30000.0, 0.0), InvalidData);
}

TEST_CASE("plan report") {
  const DeploymentPlan two = plan_drops(two_peak_profile(8300.0, 23600.0), 2, 30000.0, 0.0);
  const std::string text = plan_report(two);
  CHECK(text == plan_report(plan_drops(two_peak_profile(8300.0, 23600.0), 2, 30000.0, 0.0)));
  const auto first = text.find("drop at 8300.0 m");
  const auto second = text.find("drop at 23600.0 m");
  REQUIRE(first != std::string::npos);
  REQUIRE(second != std::string::npos);
  CHECK(first < second);

  const DeploymentPlan none = plan_drops({{31000.0, 1.0}}, 2, 30000.0, 0.0);
  CHECK(none.drops.empty());
  CHECK(plan_report(none).find("no drops scheduled") != std::string::npos);
}

TEST_CASE("plan JSON and profile CSV round trips") {
  const DeploymentPlan plan = plan_drops(two_peak_profile(8300.0, 23600.0), 2, 30000.0, 0.0);
  const nlohmann::json j = plan_to_json(plan);
  CHECK(j.at("drops").at(0).at("alt_m") == 8300.0);
  CHECK(j.at("bands").at(1).at("low_m") == 15000.0);
  CHECK(plan_to_json(plan_from_json(j)) == j);

  const auto prof = two_peak_profile(1000.0, 2000.0);
  const auto back = parse_profile(format_profile(prof));
  REQUIRE(back.size() == prof.size());
  for (std::size_t i = 0; i < prof.size(); ++i) {
    REQUIRE(back[i].altitude == prof[i].altitude);
    REQUIRE(back[i].surprise == prof[i].surprise);
  }
}

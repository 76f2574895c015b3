#include <doctest.h>

#include <cmath>

#include "minisonde/config.hpp"
#include "minisonde/error.hpp"
#include "minisonde/evaluation.hpp"
#include "minisonde/surprise.hpp"
#include "support.hpp"

using namespace minisonde;
using Eigen::Vector2d;

namespace {

GridAxes scenario_axes() {
  return {make_axis(0.0, 86400.0, 10800.0), make_axis(0.0, 30000.0, 1000.0), make_axis(38.0, 42.0, 0.5),
          make_axis(-105.0, -97.0, 0.5)};
}

std::vector<FlightParams> hourly(std::size_t n) {
  std::vector<FlightParams> out;
  for (std::size_t i = 0; i < n; ++i) {
    FlightParams p;
    p.launch = {3600.0 * static_cast<double>(i), 40.0, -103.0, 0.0};
    out.push_back(p);
  }
  return out;
}

SurpriseDataset synthetic_dataset(std::uint64_t seed, std::size_t n, double (*label)(double)) {
  Rng rng(seed);
  SurpriseDataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    SurpriseSample s;
    const double alt = rng.uniform(0.0, 30000.0);
    s.features << alt, rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), barometric_pressure(alt);
    s.label = label(alt);
    s.flight_id = i;
    ds.samples.push_back(s);
  }
  return ds;
}

const auto kSmallGrid = gp::make_hyper_grid<double>(4, {0.25, 1.0, 4.0}, {0.3, 1.0, 3.0}, {1e-4, 1e-2});

}  // namespace

TEST_CASE("surprise closed forms") {
  CHECK(surprise(Vector2d(3, 4), Vector2d(3, 4)) == 0.0);
  CHECK(surprise(Vector2d(3, 4), Vector2d(0, 0)) == 1.0);
  CHECK(surprise(Vector2d(1, 0), Vector2d(0, 1)) == std::sqrt(2.0));
}

TEST_CASE("surprise is asymmetric") {
  CHECK(surprise(Vector2d(1, 0), Vector2d(2, 0)) == 1.0);
  CHECK(surprise(Vector2d(2, 0), Vector2d(1, 0)) == 0.5);
}

TEST_CASE("surprise axioms on random vectors") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vector2d u(rng.uniform(-30, 30), rng.uniform(-30, 30));
    const Vector2d w(rng.uniform(-30, 30), rng.uniform(-30, 30));
    const double s = surprise(u, w);
    REQUIRE(s >= 0.0);
    REQUIRE(s > 0.0);  // distinct with probability one
    REQUIRE(surprise(u, u) == 0.0);
    for (double c : {2.0, -0.5, 1024.0, -0.0078125}) REQUIRE(surprise(c * u, c * w) == s);
    const double c = rng.uniform(-5.0, 5.0);
    REQUIRE(std::fabs(surprise(c * u, c * w) - s) <= 1e-15 * std::max(1.0, s));
  }
}

TEST_CASE("near-zero forecast wind is degenerate") {
  CHECK_THROWS_AS(surprise(Vector2d(0, 0), Vector2d(1, 1)), DegenerateForecast);
  CHECK_THROWS_AS(surprise(Vector2d(1e-6, 0), Vector2d(1, 1)), DegenerateForecast);
  CHECK_NOTHROW(surprise(Vector2d(2e-6, 0), Vector2d(1, 1)));
}

TEST_CASE("build_dataset") {
  const ForecastGrid base = generate_synthetic(4, scenario_axes(), standard_synthetic_spec());
  const ForecastGrid old_grid = base.with_issue_time(-21600.0);
  const auto flights = hourly(4);

  SUBCASE("identical forecasts give all-zero labels") {
    const SurpriseDataset ds = build_dataset(old_grid, base, flights);
    REQUIRE_FALSE(ds.empty());
    for (const auto& s : ds.samples) REQUIRE(s.label == 0.0);
    CHECK(ds.new_issue_time - ds.old_issue_time == 21600.0);
  }
  SUBCASE("a perturbed current forecast gives positive labels") {
    const ForecastGrid cur = perturb_grid(base, 9, 2.0);
    const SurpriseDataset ds = build_dataset(old_grid, cur, flights);
    CHECK(ds.labels().mean() > 0.0);
    for (const auto& s : ds.samples) REQUIRE(s.label >= 0.0);
  }
  SUBCASE("one flight at stride 1 yields one sample per state") {
    const SurpriseDataset ds = build_dataset(old_grid, perturb_grid(base, 9, 2.0), hourly(1), {21600.0, 1});
    const Trajectory t = simulate_ascent(old_grid, hourly(1)[0]);
    CHECK(ds.size() == t.states.size());
    // Features come from the prediction forecast.
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      REQUIRE(ds.samples[i].features[0] == t.states[i].alt);
      REQUIRE(ds.samples[i].features[1] == t.states[i].sample.wind_u);
      REQUIRE(ds.samples[i].features[3] == t.states[i].sample.pressure);
    }
  }
  SUBCASE("the default stride keeps every sixth state") {
    const SurpriseDataset ds = build_dataset(old_grid, base, hourly(1));
    const Trajectory t = simulate_ascent(old_grid, hourly(1)[0]);
    CHECK(ds.size() == (t.states.size() + 5) / 6);
  }
  SUBCASE("the issue-time lag must match") {
    CHECK_THROWS_AS(build_dataset(base, base, flights), ValidationError);
  }
  SUBCASE("all-degenerate forecasts give EmptyDataset") {
    const ForecastGrid calm = fixture::uniform_wind(0.0, 0.0);
    CHECK_THROWS_AS(build_dataset(calm.with_issue_time(-21600.0), calm, hourly(1)), EmptyDataset);
  }
}

TEST_CASE("dataset CSV round trip") {
  const SurpriseDataset ds = synthetic_dataset(3, 40, [](double a) { return std::sin(a / 5000.0) + 1.0; });
  const SurpriseDataset back = parse_dataset(format_dataset(ds));
  REQUIRE(back.size() == ds.size());
  CHECK(back.features() == ds.features());
  CHECK(back.labels() == ds.labels());
  CHECK_THROWS_AS(parse_dataset("alt_m,wind_u_ms,wind_v_ms,pressure_hpa,surprise\n1,2,3,4,-1\n"), ValidationError);
}

TEST_CASE("training on all-zero labels predicts zero") {
  const SurpriseDataset ds = synthetic_dataset(6, 60, [](double) { return 0.0; });
  const auto model = train_surprise_model(ds, kSmallGrid);
  CHECK(gp::predict_mean(model, ds.features()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("a smooth altitude-only label is learned") {
  auto f = [](double a) { return 0.5 + 0.4 * std::sin(a / 4000.0); };
  const SurpriseDataset train = synthetic_dataset(7, 300, f);
  const SurpriseDataset test = synthetic_dataset(8, 200, f);
  const auto model = train_surprise_model(train, kSmallGrid);
  CHECK(surprise_correlation(model, test).pearson_r > 0.9);
}

TEST_CASE("a single sample gives a valid model") {
  const SurpriseDataset ds = synthetic_dataset(9, 1, [](double) { return 0.37; });
  const auto model = train_surprise_model(ds, kSmallGrid);
  CHECK(std::fabs(gp::predict_mean(model, ds.features())[0] - 0.37) <= 1e-9);
  CHECK_THROWS_AS(train_surprise_model(SurpriseDataset{}, kSmallGrid), EmptyDataset);
}

TEST_CASE("predict_along covers the ascent and matches direct prediction") {
  const ForecastGrid base = generate_synthetic(4, scenario_axes(), standard_synthetic_spec());
  const SurpriseDataset ds = synthetic_dataset(10, 80, [](double a) { return a / 30000.0; });
  const auto model = train_surprise_model(ds, kSmallGrid);
  FlightParams p = hourly(1)[0];
  p.burst_altitude = 20000.0;
  const Trajectory t = simulate_flight(base, p);
  const auto est = predict_along(model, base, t);
  REQUIRE(t.burst_index.has_value());
  REQUIRE(est.size() == *t.burst_index + 1);
  gp::Matrix<double> feats(static_cast<Eigen::Index>(est.size()), 4);
  for (std::size_t i = 0; i < est.size(); ++i) {
    const auto& s = t.states[i];
    feats.row(static_cast<Eigen::Index>(i)) << s.alt, s.sample.wind_u, s.sample.wind_v, s.sample.pressure;
  }
  const auto pred = gp::predict(model, feats);
  for (std::size_t i = 0; i < est.size(); ++i) {
    REQUIRE(est[i].altitude == t.states[i].alt);
    REQUIRE(est[i].mean == pred.mean[static_cast<Eigen::Index>(i)]);
    REQUIRE(est[i].variance == pred.variance[static_cast<Eigen::Index>(i)]);
  }

  const SurpriseDataset zero = synthetic_dataset(11, 50, [](double) { return 0.0; });
  for (const auto& e : predict_along(train_surprise_model(zero, kSmallGrid), base, t)) {
    REQUIRE(std::fabs(e.mean) < 1e-6);
  }
}

TEST_CASE("even_subsample") {
  CHECK(even_subsample(5, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  const auto idx = even_subsample(1000, 7);
  CHECK(idx.size() == 7);
  CHECK(idx.front() == 0);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
}

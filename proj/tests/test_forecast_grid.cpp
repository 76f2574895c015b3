#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "minisonde/config.hpp"
#include "minisonde/error.hpp"
#include "minisonde/forecast_grid.hpp"
#include "support.hpp"

using namespace minisonde;

namespace {

std::string tiny_csv(bool drop_row = false, bool bad_pressure = false, bool bad_number = false) {
  std::ostringstream out;
  out << kGridCsvHeader << "\n# a comment\n";
  int row = 0;
  for (double t : {0.0, 3600.0})
    for (double a : {0.0, 1000.0})
      for (double la : {40.0, 41.0})
        for (double lo : {-104.0, -103.0}) {
          ++row;
          if (drop_row && row == 7) continue;
          double p = barometric_pressure(a);
          if (bad_pressure && row == 15) p = 2000.0;
          out << t << "," << a << "," << la << "," << lo << ",";
          if (bad_number && row == 3) out << "abc";
          else out << (a / 100.0 + la - 40.0);
          out << "," << t / 3600.0 << "," << p << "\n";
        }
  return out.str();
}

double rel_err(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

ForecastGrid textured_grid() {
  return fixture::grid_from(fixture::irregular_axes(), [](double t, double a, double la, double lo) {
    return AtmoSample{std::sin(la * 3.1) + 0.002 * a + std::cos(lo) * 5.0 + t * 1e-4,
                      std::cos(a * 1e-3) * la - lo * 0.3, 1013.25 * std::exp(-a / 8000.0) + 0.1 * std::sin(lo + t)};
  });
}

}  // namespace

TEST_CASE("a minimal 2x2x2x2 CSV grid loads with all 16 points") {
  const ForecastGrid g = parse_grid(tiny_csv());
  CHECK(g.axes().size() == 16);
  CHECK(g.axes().altitudes == std::vector<double>{0.0, 1000.0});
  CHECK(g.at(1, 1, 1, 0).wind_u == doctest::Approx(11.0));
  CHECK(g.at(1, 0, 0, 0).wind_v == 1.0);
}

TEST_CASE("grid CSV errors") {
  CHECK_THROWS_AS(parse_grid(tiny_csv(true)), IncompleteGrid);
  CHECK_THROWS_AS(parse_grid(tiny_csv(false, true)), ValidationError);
  CHECK_THROWS_AS(parse_grid(tiny_csv(false, false, true)), ParseError);
  CHECK_THROWS_AS(parse_grid("time_s,alt_m\n"), ParseError);
  CHECK_THROWS_AS(load_grid("/nonexistent/grid.csv"), IoError);
}

TEST_CASE("grid CSV round trip is exact and keeps the issue time") {
  const ForecastGrid g = textured_grid().with_issue_time(-21600.0);
  const ForecastGrid back = parse_grid(format_grid(g));
  CHECK(back == g);
  CHECK(back.issue_time() == -21600.0);
}

TEST_CASE("grid construction validates its invariants") {
  GridAxes ax = fixture::irregular_axes();
  const auto n = static_cast<Eigen::Index>(ax.size());
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  CHECK_THROWS_AS(ForecastGrid(ax, z, z, z, 0.0), ValidationError);
  CHECK_THROWS_AS(ForecastGrid(ax, z.head(n - 1), z, ones, 0.0), ValidationError);
  CHECK_NOTHROW(ForecastGrid(ax, z, z, ones, 0.0));
  GridAxes bad = ax;
  bad.lats = {40.0, 40.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ax;
  bad.times = {0.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ax;
  bad.lons = {-200.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("interpolation at lattice points returns stored values exactly") {
  const ForecastGrid g = textured_grid();
  const GridAxes& ax = g.axes();
  for (std::size_t it = 0; it < ax.times.size(); ++it)
    for (std::size_t ia = 0; ia < ax.altitudes.size(); ++ia)
      for (std::size_t la = 0; la < ax.lats.size(); ++la)
        for (std::size_t lo = 0; lo < ax.lons.size(); ++lo) {
          const AtmoSample s = interpolate(g, ax.times[it], ax.lats[la], ax.lons[lo], ax.altitudes[ia]);
          REQUIRE(s == g.at(it, ia, la, lo));
        }
}

TEST_CASE("altitude midpoint between wind_u 0 and 10 gives 5") {
  GridAxes ax{{0.0, 1.0}, {0.0, 1000.0}, {40.0, 41.0}, {-104.0, -103.0}};
  const ForecastGrid g = fixture::grid_from(ax, [](double, double a, double, double) {
    return AtmoSample{a / 100.0, 0.0, barometric_pressure(a)};
  });
  CHECK(interpolate(g, 0.0, 40.0, -104.0, 500.0).wind_u == 5.0);
}

TEST_CASE("interpolation matches the nested 1-D oracle at random interior points") {
  const ForecastGrid g = textured_grid();
  const GridAxes& ax = g.axes();
  Rng rng(7);
  for (int q = 0; q < 500; ++q) {
    const double t = rng.uniform(ax.times.front(), ax.times.back());
    const double la = rng.uniform(ax.lats.front(), ax.lats.back());
    const double lo = rng.uniform(ax.lons.front(), ax.lons.back());
    const double a = rng.uniform(ax.altitudes.front(), ax.altitudes.back());
    const AtmoSample s = interpolate(g, t, la, lo, a);
    auto field = [&](const Eigen::VectorXd& v) {
      return [&g, &v](std::size_t i, std::size_t j, std::size_t k, std::size_t l) { return v[static_cast<Eigen::Index>(g.index(i, j, k, l))]; };
    };
    REQUIRE(rel_err(s.wind_u, oracle::nested_interp(ax, field(g.wind_u()), t, la, lo, a)) <= 1e-12);
    REQUIRE(rel_err(s.wind_v, oracle::nested_interp(ax, field(g.wind_v()), t, la, lo, a)) <= 1e-12);
    REQUIRE(rel_err(s.pressure, oracle::nested_interp(ax, field(g.pressure()), t, la, lo, a)) <= 1e-12);
  }
}

TEST_CASE("interpolation is linear along each axis and bounded by its cell") {
  const ForecastGrid g = textured_grid();
  Rng rng(11);
  for (int q = 0; q < 200; ++q) {
    // Stay inside one cell per axis so linearity holds.
    const double t = rng.uniform(3600.0, 9000.0);
    const double la = rng.uniform(38.4, 39.5);
    const double lo = rng.uniform(-104.1, -103.0);
    const double a0 = rng.uniform(750.0, 1300.0), a1 = rng.uniform(1400.0, 2000.0);
    const double fa = interpolate(g, t, la, lo, a0).wind_u, fb = interpolate(g, t, la, lo, a1).wind_u;
    const double fm = interpolate(g, t, la, lo, 0.5 * (a0 + a1)).wind_u;
    REQUIRE(std::fabs(fm - 0.5 * (fa + fb)) <= 1e-12 * std::max(1.0, std::fabs(fm)));

    double lo_v = 1e300, hi_v = -1e300;
    for (std::size_t it : {1, 2})
      for (std::size_t ia : {1, 2})
        for (std::size_t il : {1, 2})
          for (std::size_t io : {1, 2}) {
            lo_v = std::min(lo_v, g.at(it, ia, il, io).wind_v);
            hi_v = std::max(hi_v, g.at(it, ia, il, io).wind_v);
          }
    const double v = interpolate(g, t, la, lo, a0).wind_v;
    REQUIRE(v >= lo_v - 1e-12);
    REQUIRE(v <= hi_v + 1e-12);
  }
}

TEST_CASE("queries outside the bounding box raise OutOfDomain") {
  const ForecastGrid g = textured_grid();
  CHECK_THROWS_AS(interpolate(g, -1.0, 39.0, -104.0, 100.0), OutOfDomain);
  CHECK_THROWS_AS(interpolate(g, 0.0, 41.0, -104.0, 100.0), OutOfDomain);
  CHECK_THROWS_AS(interpolate(g, 0.0, 39.0, -102.0, 100.0), OutOfDomain);
  CHECK_THROWS_AS(interpolate(g, 0.0, 39.0, -104.0, 5000.5), OutOfDomain);
}

TEST_CASE("generate_synthetic") {
  const GridAxes ax{make_axis(0.0, 43200.0, 10800.0), make_axis(0.0, 30000.0, 2500.0), make_axis(39.0, 41.0, 0.5),
                    make_axis(-104.0, -101.0, 0.5)};
  const SyntheticSpec spec = standard_synthetic_spec();

  SUBCASE("same seed twice is bitwise identical, other seeds differ") {
    CHECK(generate_synthetic(5, ax, spec) == generate_synthetic(5, ax, spec));
    CHECK_FALSE(generate_synthetic(5, ax, spec) == generate_synthetic(6, ax, spec));
  }
  SUBCASE("zero amplitudes give zero wind and the barometric profile") {
    SyntheticSpec zero;
    const ForecastGrid g = generate_synthetic(5, ax, zero);
    CHECK(g.wind_u().cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.wind_v().cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t ia = 0; ia < ax.altitudes.size(); ++ia) {
      CHECK(g.at(2, ia, 1, 3).pressure == barometric_pressure(ax.altitudes[ia]));
    }
    CHECK(g.at(0, 0, 0, 0).pressure == 1013.25);
  }
  SUBCASE("pressure columns are non-increasing with altitude") {
    SyntheticSpec s = spec;
    s.pressure_rel_amplitude = 0.2;
    const ForecastGrid g = generate_synthetic(9, ax, s);
    for (std::size_t it = 0; it < ax.times.size(); ++it)
      for (std::size_t la = 0; la < ax.lats.size(); ++la)
        for (std::size_t lo = 0; lo < ax.lons.size(); ++lo)
          for (std::size_t ia = 1; ia < ax.altitudes.size(); ++ia) {
            REQUIRE(g.at(it, ia, la, lo).pressure <= g.at(it, ia - 1, la, lo).pressure);
          }
  }
  SUBCASE("spec JSON round trip") {
    const SyntheticSpec back = nlohmann::json(spec).get<SyntheticSpec>();
    CHECK(generate_synthetic(3, ax, back) == generate_synthetic(3, ax, spec));
    CHECK_THROWS(nlohmann::json::parse(R"({"modes":[{"amplitude_ms":1,"wavelength_m":1,"axis":"sideways"}]})")
                     .get<SyntheticSpec>());
  }
}

TEST_CASE("perturb_grid") {
  const GridAxes ax{make_axis(0.0, 86400.0, 10800.0), make_axis(0.0, 30000.0, 1000.0), make_axis(38.0, 42.0, 0.5),
                    make_axis(-105.0, -99.0, 0.5)};
  const ForecastGrid base = generate_synthetic(1, ax, standard_synthetic_spec());

  CHECK(perturb_grid(base, 4, 0.0) == base);
  CHECK(perturb_grid(base, 4, 1.5) == perturb_grid(base, 4, 1.5));
  CHECK_THROWS_AS(perturb_grid(base, 4, -1.0), ValidationError);

  for (double m : {0.3, 2.0}) {
    const ForecastGrid p = perturb_grid(base, 12, m);
    const double rms_u = std::sqrt((p.wind_u() - base.wind_u()).squaredNorm() / static_cast<double>(ax.size()));
    const double rms_v = std::sqrt((p.wind_v() - base.wind_v()).squaredNorm() / static_cast<double>(ax.size()));
    CHECK(std::fabs(rms_u - m) <= 0.2 * m);
    CHECK(std::fabs(rms_v - m) <= 0.2 * m);
    for (std::size_t it = 0; it < ax.times.size(); ++it)
      for (std::size_t la = 0; la < ax.lats.size(); ++la)
        for (std::size_t ia = 1; ia < ax.altitudes.size(); ++ia) {
          REQUIRE(p.at(it, ia, la, 2).pressure <= p.at(it, ia - 1, la, 2).pressure);
        }
  }
}

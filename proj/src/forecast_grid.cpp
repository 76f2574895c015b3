#include "minisonde/forecast_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "minisonde/csv.hpp"
#include "minisonde/error.hpp"

namespace minisonde {

namespace {

void validate_axis(const std::vector<double>& axis, const char* name, double lo, double hi) {
  if (axis.size() < 2) {
    throw ValidationError(std::string("axis '") + name + "' needs at least 2 values");
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) throw ValidationError(std::string("axis '") + name + "' has non-finite value");
    if (axis[i] < lo || axis[i] > hi) throw ValidationError(std::string("axis '") + name + "' out of range");
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw ValidationError(std::string("axis '") + name + "' is not strictly increasing");
    }
  }
}

bool within(const std::vector<double>& axis, double x) { return x >= axis.front() && x <= axis.back(); }

struct Bracket {
  std::size_t lo;
  double frac;
};

Bracket bracket(const std::vector<double>& axis, double x, const char* name) {
  if (!(x >= axis.front() && x <= axis.back())) {
    throw OutOfDomain(std::string(name) + " " + csv::format_double(x) + " outside [" +
                      csv::format_double(axis.front()) + ", " + csv::format_double(axis.back()) + "]");
  }
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  std::size_t i = static_cast<std::size_t>(it - axis.begin());
  i = (i == 0) ? 0 : i - 1;
  if (i >= axis.size() - 1) i = axis.size() - 2;
  return {i, (x - axis[i]) / (axis[i + 1] - axis[i])};
}

}  // namespace

void GridAxes::validate() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  validate_axis(times, "time", -inf, inf);
  validate_axis(altitudes, "altitude", -inf, inf);
  validate_axis(lats, "lat", -90.0, 90.0);
  validate_axis(lons, "lon", -180.0, 180.0);
}

bool GridAxes::contains(double t, double lat, double lon, double alt) const {
  return within(times, t) && within(lats, lat) && within(lons, lon) && within(altitudes, alt);
}

std::vector<double> make_axis(double first, double last, double step) {
  if (!(step > 0.0) || !(last > first)) throw ValidationError("make_axis needs first < last and step > 0");
  const auto n = static_cast<std::size_t>(std::llround((last - first) / step));
  std::vector<double> axis(n + 1);
  for (std::size_t i = 0; i <= n; ++i) axis[i] = first + static_cast<double>(i) * step;
  axis.back() = last;
  return axis;
}

ForecastGrid::ForecastGrid(GridAxes axes, Eigen::VectorXd wind_u, Eigen::VectorXd wind_v,
                           Eigen::VectorXd pressure, double issue_time)
    : axes_(std::move(axes)),
      wind_u_(std::move(wind_u)),
      wind_v_(std::move(wind_v)),
      pressure_(std::move(pressure)),
      issue_time_(issue_time) {
  axes_.validate();
  const auto n = static_cast<Eigen::Index>(axes_.size());
  if (wind_u_.size() != n || wind_v_.size() != n || pressure_.size() != n) {
    throw ValidationError("field sizes do not match the axis shape");
  }
  if (!wind_u_.allFinite() || !wind_v_.allFinite() || !pressure_.allFinite()) {
    throw ValidationError("grid contains non-finite values");
  }
  if ((pressure_.array() <= 0.0).any()) throw ValidationError("pressure must be strictly positive");
  const auto [nt, na, nla, nlo] = axes_.shape();
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t ia = 1; ia < na; ++ia)
      for (std::size_t ila = 0; ila < nla; ++ila)
        for (std::size_t ilo = 0; ilo < nlo; ++ilo) {
          if (pressure_[index(it, ia, ila, ilo)] > pressure_[index(it, ia - 1, ila, ilo)]) {
            throw ValidationError("pressure increases with altitude at time " +
                                  csv::format_double(axes_.times[it]) + ", lat " +
                                  csv::format_double(axes_.lats[ila]) + ", lon " +
                                  csv::format_double(axes_.lons[ilo]));
          }
        }
}

ForecastGrid ForecastGrid::with_issue_time(double issue_time) const {
  ForecastGrid copy = *this;
  copy.issue_time_ = issue_time;
  return copy;
}

bool ForecastGrid::operator==(const ForecastGrid& other) const {
  return issue_time_ == other.issue_time_ && axes_ == other.axes_ && wind_u_ == other.wind_u_ &&
         wind_v_ == other.wind_v_ && pressure_ == other.pressure_;
}

AtmoSample interpolate(const ForecastGrid& grid, double t, double lat, double lon, double alt) {
  const GridAxes& ax = grid.axes();
  const Bracket bt = bracket(ax.times, t, "time");
  const Bracket ba = bracket(ax.altitudes, alt, "altitude");
  const Bracket bla = bracket(ax.lats, lat, "lat");
  const Bracket blo = bracket(ax.lons, lon, "lon");

  const double wt[2] = {1.0 - bt.frac, bt.frac};
  const double wa[2] = {1.0 - ba.frac, ba.frac};
  const double wla[2] = {1.0 - bla.frac, bla.frac};
  const double wlo[2] = {1.0 - blo.frac, blo.frac};

  AtmoSample out{0.0, 0.0, 0.0};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double w = wt[i] * wa[j] * wla[k] * wlo[l];
          const std::size_t idx = grid.index(bt.lo + i, ba.lo + j, bla.lo + k, blo.lo + l);
          out.wind_u += w * grid.wind_u()[idx];
          out.wind_v += w * grid.wind_v()[idx];
          out.pressure += w * grid.pressure()[idx];
        }
  return out;
}

// --- CSV ---------------------------------------------------------------

namespace {

struct GridRow {
  double t, alt, lat, lon, u, v, p;
};

std::vector<double> unique_sorted(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::size_t locate(const std::vector<double>& axis, double x) {
  return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), x) - axis.begin());
}

}  // namespace

ForecastGrid parse_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<GridRow> rows;
  double issue_time = 0.0;
  bool seen_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::is_comment_or_blank(line)) {
      constexpr std::string_view key = "# issue_time_s=";
      if (line.rfind(key, 0) == 0) issue_time = csv::parse_double(std::string_view(line).substr(key.size()), "issue_time_s");
      continue;
    }
    if (!seen_header) {
      if (line != kGridCsvHeader) throw ParseError("unexpected grid header '" + line + "'");
      seen_header = true;
      continue;
    }
    const auto fields = csv::split(line);
    const std::string ctx = "grid line " + std::to_string(line_no);
    if (fields.size() != 7) throw ParseError(ctx + ": expected 7 columns, got " + std::to_string(fields.size()));
    GridRow r{};
    double* dst[7] = {&r.t, &r.alt, &r.lat, &r.lon, &r.u, &r.v, &r.p};
    for (std::size_t c = 0; c < 7; ++c) {
      *dst[c] = csv::parse_double(fields[c], ctx);
      if (!std::isfinite(*dst[c])) throw ParseError(ctx + ": non-finite value");
    }
    rows.push_back(r);
  }
  if (!seen_header) throw ParseError("grid file has no header");
  if (rows.empty()) throw IncompleteGrid("grid file has no data rows");

  GridAxes axes;
  {
    std::vector<double> ts, as, las, los;
    for (const auto& r : rows) {
      ts.push_back(r.t);
      as.push_back(r.alt);
      las.push_back(r.lat);
      los.push_back(r.lon);
    }
    axes.times = unique_sorted(std::move(ts));
    axes.altitudes = unique_sorted(std::move(as));
    axes.lats = unique_sorted(std::move(las));
    axes.lons = unique_sorted(std::move(los));
  }
  axes.validate();

  const auto n = static_cast<Eigen::Index>(axes.size());
  Eigen::VectorXd u(n), v(n), p(n);
  std::vector<char> filled(axes.size(), 0);
  const std::size_t na = axes.altitudes.size(), nla = axes.lats.size(), nlo = axes.lons.size();
  for (const auto& r : rows) {
    const std::size_t k =
        ((locate(axes.times, r.t) * na + locate(axes.altitudes, r.alt)) * nla + locate(axes.lats, r.lat)) * nlo +
        locate(axes.lons, r.lon);
    if (filled[k]) throw ValidationError("duplicate lattice point in grid file");
    filled[k] = 1;
    u[static_cast<Eigen::Index>(k)] = r.u;
    v[static_cast<Eigen::Index>(k)] = r.v;
    p[static_cast<Eigen::Index>(k)] = r.p;
  }
  const auto missing = static_cast<std::size_t>(std::count(filled.begin(), filled.end(), 0));
  if (missing > 0) {
    throw IncompleteGrid(std::to_string(missing) + " of " + std::to_string(axes.size()) +
                         " lattice points missing");
  }
  return ForecastGrid(std::move(axes), std::move(u), std::move(v), std::move(p), issue_time);
}

ForecastGrid load_grid(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  std::string text;
  for (const auto& l : lines) {
    text += l;
    text += '\n';
  }
  return parse_grid(text);
}

std::string format_grid(const ForecastGrid& grid) {
  const GridAxes& ax = grid.axes();
  std::string out;
  out.reserve(grid.axes().size() * 64);
  out += "# issue_time_s=" + csv::format_double(grid.issue_time()) + "\n";
  out += kGridCsvHeader;
  out += '\n';
  const auto [nt, na, nla, nlo] = ax.shape();
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t ia = 0; ia < na; ++ia)
      for (std::size_t ila = 0; ila < nla; ++ila)
        for (std::size_t ilo = 0; ilo < nlo; ++ilo) {
          const AtmoSample s = grid.at(it, ia, ila, ilo);
          out += csv::format_double(ax.times[it]);
          out += ',';
          out += csv::format_double(ax.altitudes[ia]);
          out += ',';
          out += csv::format_double(ax.lats[ila]);
          out += ',';
          out += csv::format_double(ax.lons[ilo]);
          out += ',';
          out += csv::format_double(s.wind_u);
          out += ',';
          out += csv::format_double(s.wind_v);
          out += ',';
          out += csv::format_double(s.pressure);
          out += '\n';
        }
  return out;
}

void save_grid(const ForecastGrid& grid, const std::filesystem::path& path) {
  csv::write_text(path, format_grid(grid));
}

}  // namespace minisonde

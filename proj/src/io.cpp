#include "vph/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include <json.hpp>

#include "vph/error.hpp"
#include "vph/log.hpp"
#include "vph/random.hpp"

namespace vph {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Reads exactly `width` digits.
bool take_int(std::string_view& s, std::size_t width, int& out) {
  if (s.size() < width) return false;
  out = 0;
  for (std::size_t i = 0; i < width; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    out = out * 10 + (s[i] - '0');
  }
  s.remove_prefix(width);
  return true;
}

bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

std::optional<double> parse_iso(std::string_view s) {
  int y = 0, mo = 0, d = 0;
  if (!take_int(s, 4, y) || !take_char(s, '-') || !take_int(s, 2, mo) || !take_char(s, '-') ||
      !take_int(s, 2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  double seconds = 0.0;
  if (!s.empty()) {
    if (!(take_char(s, 'T') || take_char(s, ' '))) return std::nullopt;
    int h = 0, mi = 0;
    if (!take_int(s, 2, h) || !take_char(s, ':') || !take_int(s, 2, mi)) return std::nullopt;
    if (h > 23 || mi > 59) return std::nullopt;
    seconds = 3600.0 * h + 60.0 * mi;
    if (take_char(s, ':')) {
      std::size_t len = 0;
      while (len < s.size() && (std::isdigit(static_cast<unsigned char>(s[len])) || s[len] == '.')) {
        ++len;
      }
      const auto sec = parse_number(s.substr(0, len));
      if (!sec || *sec < 0.0 || *sec >= 61.0) return std::nullopt;
      seconds += *sec;
      s.remove_prefix(len);
    }
    if (take_char(s, 'Z')) {
    } else if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
      const double sign = s.front() == '+' ? 1.0 : -1.0;
      s.remove_prefix(1);
      int oh = 0, om = 0;
      if (!take_int(s, 2, oh)) return std::nullopt;
      take_char(s, ':');
      if (!s.empty() && !take_int(s, 2, om)) return std::nullopt;
      seconds -= sign * (3600.0 * oh + 60.0 * om);
    }
    if (!s.empty()) return std::nullopt;
  }
  const double days = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
  return days + seconds / 86400.0;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::vector<std::string>& names) {
  for (const std::string& name : names) {
    const std::string want = lower(name);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == want) return i;
    }
  }
  return std::nullopt;
}

double field_number(const std::vector<std::string_view>& fields, std::size_t col, const char* what,
                    std::size_t line) {
  if (col >= fields.size()) throw ParseError(std::string("missing ") + what + " field", line);
  const auto v = parse_number(fields[col]);
  if (!v) {
    throw ParseError(std::string("cannot parse ") + what + " '" + std::string(fields[col]) + "'",
                     line);
  }
  return *v;
}

double field_time(const std::vector<std::string_view>& fields, std::size_t col, std::size_t line) {
  if (col >= fields.size()) throw ParseError("missing time field", line);
  const auto v = parse_time_days(fields[col]);
  if (!v) throw ParseError("cannot parse time '" + std::string(fields[col]) + "'", line);
  return *v;
}

// Parses "# key=value" metadata; other comments are ignored.
void read_metadata(std::string_view line, std::map<std::string, double>& meta) {
  line.remove_prefix(1);
  line = trim(line);
  const std::size_t eq = line.find('=');
  if (eq == std::string_view::npos) return;
  const auto value = parse_number(trim(line.substr(eq + 1)));
  if (value) meta[lower(trim(line.substr(0, eq)))] = *value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Row {
  double t;
  std::optional<double> mag;
  std::optional<Location> loc;
};

}  // namespace

std::optional<double> parse_time_days(std::string_view text) {
  text = trim(text);
  if (auto v = parse_number(text)) return v;
  return parse_iso(text);
}

std::size_t break_ties(std::vector<double>& t, std::uint64_t seed) {
  if (t.size() < 2) return 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double g = t[i] - t[i - 1];
    if (g > 0.0) min_gap = std::min(min_gap, g);
  }
  if (!std::isfinite(min_gap)) min_gap = 1e-6 * std::max(1.0, std::abs(t.front()));
  const double half = 0.5 * min_gap;

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> offset(0.0, half);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < t.size();) {
    std::size_t j = i + 1;
    while (j < t.size() && t[j] == t[i]) ++j;
    if (j - i > 1) {
      std::vector<double> offs(j - i - 1);
      for (double& o : offs) o = offset(rng);
      std::sort(offs.begin(), offs.end());
      const double base = t[i];
      for (std::size_t k = 0; k < offs.size(); ++k) {
        // Strictness if two offsets coincide or round onto the base.
        double v = base + offs[k];
        const double floor_v = k == 0 ? base : t[i + k];
        if (!(v > floor_v)) v = std::nextafter(floor_v, std::numeric_limits<double>::infinity());
        t[i + 1 + k] = v;
      }
      moved += offs.size();
    }
    i = j;
  }
  return moved;
}

EventCatalog read_catalog(std::istream& in, const CatalogFileSpec& spec) {
  std::map<std::string, double> meta;
  std::vector<std::string> header;
  std::optional<std::size_t> c_time, c_mag, c_lat, c_lon, c_depth;
  std::vector<Row> rows;
  std::size_t parsed_rows = 0;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '#') {
      read_metadata(text, meta);
      continue;
    }
    const auto fields = split(text, spec.delimiter);
    if (header.empty()) {
      for (auto f : fields) header.push_back(lower(f));
      c_time = find_column(header, spec.time_columns);
      if (!c_time) throw ParseError("header has no time column", line);
      c_mag = find_column(header, spec.magnitude_columns);
      c_lat = find_column(header, spec.latitude_columns);
      c_lon = find_column(header, spec.longitude_columns);
      c_depth = find_column(header, spec.depth_columns);
      continue;
    }
    ++parsed_rows;
    Row row{field_time(fields, *c_time, line), std::nullopt, std::nullopt};
    if (c_mag) row.mag = field_number(fields, *c_mag, "magnitude", line);
    if (c_lat && c_lon) {
      row.loc = Location{field_number(fields, *c_lon, "longitude", line),
                         field_number(fields, *c_lat, "latitude", line)};
    }
    const CatalogFilter& f = spec.filter;
    if (f.min_magnitude && (!row.mag || *row.mag < *f.min_magnitude)) continue;
    if (f.max_depth) {
      if (!c_depth) throw ParseError("depth filter set but no depth column", line);
      if (field_number(fields, *c_depth, "depth", line) > *f.max_depth) continue;
    }
    if ((f.min_latitude || f.max_latitude || f.min_longitude || f.max_longitude) && !row.loc) {
      throw ParseError("location filter set but no latitude/longitude columns", line);
    }
    if (f.min_latitude && row.loc->y < *f.min_latitude) continue;
    if (f.max_latitude && row.loc->y > *f.max_latitude) continue;
    if (f.min_longitude && row.loc->x < *f.min_longitude) continue;
    if (f.max_longitude && row.loc->x > *f.max_longitude) continue;
    if (f.start && row.t < *f.start) continue;
    if (f.end && row.t > *f.end) continue;
    rows.push_back(row);
  }
  if (header.empty()) throw ParseError("missing header row", line);
  if (rows.empty()) {
    warn(parsed_rows == 0 ? "catalog has no data rows" : "no catalog rows pass the filters");
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  double origin = 0.0;
  if (spec.filter.start) {
    origin = *spec.filter.start;
  } else if (meta.count("origin")) {
    origin = meta["origin"];
  } else if (!rows.empty()) {
    origin = rows.front().t;
  }

  std::vector<double> times(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) times[i] = rows[i].t - origin;
  const std::size_t moved = break_ties(times, spec.jitter_seed);
  if (moved > 0) warn("separated " + std::to_string(moved) + " tied event times");

  double T = times.empty() ? 0.0 : times.back();
  if (spec.window_end) {
    T = *spec.window_end;
  } else if (spec.filter.end) {
    T = *spec.filter.end - origin;
  } else if (meta.count("window_end")) {
    T = meta["window_end"];
  }
  if (!times.empty() && times.back() > T) {
    throw std::invalid_argument("window end precedes the last event");
  }

  std::optional<std::vector<double>> marks;
  if (c_mag) {
    marks.emplace();
    for (const Row& r : rows) marks->push_back(*r.mag);
  }
  std::optional<std::vector<Location>> coords;
  if (c_lat && c_lon) {
    coords.emplace();
    for (const Row& r : rows) coords->push_back(*r.loc);
  }
  return EventCatalog(std::move(times), T, std::move(marks), std::move(coords));
}

EventCatalog read_catalog(const std::filesystem::path& path, const CatalogFileSpec& spec) {
  auto in = open_input(path);
  return read_catalog(in, spec);
}

void write_catalog(std::ostream& out, const EventCatalog& catalog) {
  out << "# origin=0\n# window_end=" << fmt17(catalog.window_end()) << "\n";
  out << "time";
  if (catalog.has_marks()) out << ",magnitude";
  if (catalog.has_coords()) out << ",longitude,latitude";
  out << "\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    out << fmt17(catalog.time(i));
    if (catalog.has_marks()) out << ',' << fmt17(catalog.marks()[i]);
    if (catalog.has_coords()) {
      out << ',' << fmt17(catalog.coords()[i].x) << ',' << fmt17(catalog.coords()[i].y);
    }
    out << '\n';
  }
}

void write_catalog(const std::filesystem::path& path, const EventCatalog& catalog) {
  auto out = open_output(path);
  write_catalog(out, catalog);
}

EventCatalog disaggregate_counts(std::istream& in, const CumulativeCountSpec& spec,
                                 std::uint64_t seed) {
  struct Period {
    double start, end;
    double count;
    std::size_t line;
  };
  std::vector<Period> periods;
  bool have_header = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, spec.delimiter);
    if (!have_header) {
      have_header = true;
      continue;
    }
    if (fields.size() < 3) throw ParseError("expected start, end and count", line);
    Period p{field_time(fields, 0, line), field_time(fields, 1, line),
             field_number(fields, 2, "count", line), line};
    if (!(p.end > p.start)) throw ParseError("period end must follow its start", line);
    if (p.count < 0.0 || p.count != std::floor(p.count)) {
      throw ParseError("count must be a nonnegative integer", line);
    }
    periods.push_back(p);
  }
  if (!have_header) throw ParseError("missing header row", line);

  if (spec.mode == CountMode::cumulative) {
    double previous = 0.0;
    for (Period& p : periods) {
      if (p.count < previous) throw ParseError("cumulative counts decrease", p.line);
      const double total = p.count;
      p.count -= previous;
      previous = total;
    }
  }
  std::vector<Period> sorted(periods);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Period& a, const Period& b) { return a.start < b.start; });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].start < sorted[k - 1].end) {
      throw ParseError("period overlaps the one on line " + std::to_string(sorted[k - 1].line),
                       sorted[k].line);
    }
  }
  if (sorted.empty()) return EventCatalog({}, 0.0);

  const double origin = sorted.front().start;
  const double T = sorted.back().end - origin;
  Rng rng = make_rng(seed);
  std::vector<double> times;
  for (const Period& p : sorted) {
    std::uniform_real_distribution<double> at(p.start - origin, p.end - origin);
    const auto c = static_cast<std::size_t>(p.count);
    for (std::size_t i = 0; i < c; ++i) times.push_back(at(rng));
  }
  std::sort(times.begin(), times.end());
  break_ties(times, derive_seed(seed, 1));
  for (double& t : times) t = std::clamp(t, 0.0, T);
  return EventCatalog(std::move(times), T);
}

EventCatalog disaggregate_counts(const std::filesystem::path& path,
                                 const CumulativeCountSpec& spec, std::uint64_t seed) {
  auto in = open_input(path);
  return disaggregate_counts(in, spec, seed);
}

std::string fit_result_json(const FitResult& fit) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j;
  j["mu"] = number(fit.mu_hat);
  j["K"] = number(fit.K_hat);
  j["beta"] = number(fit.beta_hat);
  j["standard_errors"] = {{"mu", number(fit.standard_errors[0])},
                          {"K", number(fit.standard_errors[1])},
                          {"beta", number(fit.standard_errors[2])}};
  j["log_likelihood"] = number(fit.log_likelihood);
  j["converged"] = fit.converged;
  j["evaluations"] = fit.evaluations;
  return j.dump(2);
}

void write_productivity_csv(std::ostream& out, const EventCatalog& catalog,
                            std::span<const double> raw, std::span<const double> estimate) {
  if (raw.size() != catalog.size() || estimate.size() != catalog.size()) {
    throw std::invalid_argument("estimates do not align with the catalog");
  }
  out << "time";
  if (catalog.has_marks()) out << ",magnitude";
  out << ",raw,estimate\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    out << fmt17(catalog.time(i));
    if (catalog.has_marks()) out << ',' << fmt17(catalog.marks()[i]);
    out << ',' << fmt17(raw[i]) << ',' << fmt17(estimate[i]) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const MarkCurve& curve) {
  out << "magnitude,productivity,density\n";
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    out << fmt17(curve.grid[k]) << ',' << fmt17(curve.values[k]) << ',' << fmt17(curve.density[k])
        << '\n';
  }
}

void write_residuals_csv(std::ostream& out, const SuperThinResult& result,
                         std::span<const double> cumsum, const UniformityBand& band) {
  const std::size_t m = result.times.size();
  if (cumsum.size() != m || band.lower.size() != m || band.upper.size() != m) {
    throw std::invalid_argument("residual columns differ in length");
  }
  out << "t_k,u_k,cumsum,lower,upper,origin\n";
  for (std::size_t k = 0; k < m; ++k) {
    out << fmt17(result.times[k]) << ',' << fmt17(result.standardized_u[k]) << ','
        << fmt17(cumsum[k]) << ',' << fmt17(band.lower[k]) << ',' << fmt17(band.upper[k]) << ','
        << (result.origin[k] == ResidualOrigin::kept ? "kept" : "superposed") << '\n';
  }
}

}  // namespace vph

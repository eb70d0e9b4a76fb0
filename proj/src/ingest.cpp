#include "tflow/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"

#include "tflow/error.hpp"

namespace tflow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

template <typename Int>
bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, Int& out) {
  if (pos + len > s.size()) return false;
  const auto* first = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc() && ptr == first + len;
}

enum class TimeFormat { Epoch, Iso };

std::optional<double> parse_time(std::string_view s, TimeFormat fmt) {
  return fmt == TimeFormat::Epoch ? parse_number(s) : parse_iso8601(s);
}

int column_index(const std::vector<std::string_view>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw InputError("input header has no column named '" + name + "'");
}

bool point_less(const TrajectoryPoint& a, const TrajectoryPoint& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

}  // namespace

std::optional<double> parse_iso8601(std::string_view s) {
  int year = 0;
  unsigned month = 0, day = 0;
  int hour = 0, minute = 0;
  if (!parse_fixed(s, 0, 4, year) || s.size() < 16 || s[4] != '-' || !parse_fixed(s, 5, 2, month) ||
      s[7] != '-' || !parse_fixed(s, 8, 2, day) || (s[10] != 'T' && s[10] != ' ') ||
      !parse_fixed(s, 11, 2, hour) || s[13] != ':' || !parse_fixed(s, 14, 2, minute)) {
    return std::nullopt;
  }
  std::size_t pos = 16;
  double seconds = 0.0;
  if (pos < s.size() && s[pos] == ':') {
    std::size_t end = pos + 1;
    while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) ++end;
    auto sec = parse_number(s.substr(pos + 1, end - pos - 1));
    if (!sec || *sec < 0.0 || *sec >= 61.0) return std::nullopt;
    seconds = *sec;
    pos = end;
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      // UTC
    } else if (s[pos] == '+' || s[pos] == '-') {
      int oh = 0, om = 0;
      if (!parse_fixed(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t rest = pos + 3;
      if (rest < s.size() && s[rest] == ':') ++rest;
      if (rest < s.size() && !parse_fixed(s, rest, 2, om)) return std::nullopt;
      if (rest < s.size() && rest + 2 != s.size()) return std::nullopt;
      offset_minutes = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
    } else {
      return std::nullopt;
    }
  }
  if (hour > 23 || minute > 59) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + seconds -
         offset_minutes * 60.0;
}

void validate(const Dataset& ds) {
  std::set<std::string_view> ids;
  for (const auto& tr : ds.trajectories) {
    if (!ids.insert(tr.id).second) throw InvariantError("duplicate trajectory id '" + tr.id + "'");
    if (tr.points.size() < 2) throw InvariantError("trajectory '" + tr.id + "' has fewer than 2 points");
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      const auto& p = tr.points[i];
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t) || p.t < 0.0) {
        throw InvariantError("trajectory '" + tr.id + "' has a non-finite or negative value");
      }
      if (i > 0 && p.t < tr.points[i - 1].t) {
        throw InvariantError("trajectory '" + tr.id + "' is not time-ordered");
      }
      if (p.t < ds.day_start || p.t > ds.day_end) {
        throw InvariantError("trajectory '" + tr.id + "' has a point outside the analysis window");
      }
    }
  }
}

ParseResult parse_trajectories(std::istream& in, const ColumnSchema& schema, Crs crs,
                               std::optional<TimeWindow> window) {
  if (!in) throw InputError("input stream is not readable");
  if (window && !(window->end >= window->start)) throw ConfigError("time window end precedes start");

  ParseResult result;
  auto& stats = result.stats;
  std::string line;
  if (!std::getline(in, line)) {
    if (in.bad()) throw InputError("failed reading input stream");
    result.dataset.crs = crs;
    if (window) {
      result.dataset.day_start = window->start;
      result.dataset.day_end = window->end;
    }
    return result;
  }
  const auto header = split(line, schema.delimiter);
  const int ci = column_index(header, schema.id);
  const int cx = column_index(header, schema.x);
  const int cy = column_index(header, schema.y);
  const int ct = column_index(header, schema.t);
  const auto width = static_cast<std::size_t>(std::max({ci, cx, cy, ct}) + 1);

  std::map<std::string, std::vector<TrajectoryPoint>, std::less<>> grouped;
  std::optional<TimeFormat> format;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++stats.rows;
    const auto fields = split(line, schema.delimiter);
    if (fields.size() < width || fields[ci].empty()) {
      ++stats.malformed_rows;
      continue;
    }
    if (!format) format = parse_number(fields[ct]) ? TimeFormat::Epoch : TimeFormat::Iso;
    const auto x = parse_number(fields[cx]);
    const auto y = parse_number(fields[cy]);
    const auto t = parse_time(fields[ct], *format);
    if (!x || !y || !t || !std::isfinite(*x) || !std::isfinite(*y) || !std::isfinite(*t) || *t < 0.0) {
      ++stats.malformed_rows;
      continue;
    }
    if (crs == Crs::GeographicDegrees && (std::abs(*y) > 90.0 || std::abs(*x) > 180.0)) {
      ++stats.malformed_rows;
      continue;
    }
    if (window && (*t < window->start || *t > window->end)) {
      ++stats.out_of_window_points;
      continue;
    }
    auto it = grouped.find(fields[ci]);
    if (it == grouped.end()) it = grouped.emplace(std::string(fields[ci]), std::vector<TrajectoryPoint>{}).first;
    it->second.push_back({*x, *y, *t});
  }
  if (in.bad()) throw InputError("failed reading input stream");

  auto& ds = result.dataset;
  ds.crs = crs;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto& [id, pts] : grouped) {
    std::sort(pts.begin(), pts.end(), point_less);
    const auto before = pts.size();
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    stats.duplicate_points += before - pts.size();
    if (pts.size() < 2) {
      ++stats.dropped_trajectories;
      continue;
    }
    lo = std::min(lo, pts.front().t);
    hi = std::max(hi, pts.back().t);
    ds.trajectories.push_back({id, std::move(pts)});
  }
  if (window) {
    ds.day_start = window->start;
    ds.day_end = window->end;
  } else if (!ds.trajectories.empty()) {
    ds.day_start = lo;
    ds.day_end = hi;
  }
  return result;
}

double path_length(const Trajectory& traj, std::size_t first, std::size_t last, Crs crs) {
  double total = 0.0;
  for (std::size_t i = first + 1; i <= last && i < traj.points.size(); ++i) {
    total += distance(traj.points[i - 1].position(), traj.points[i].position(), crs);
  }
  return total;
}

double path_length(const Trajectory& traj, Crs crs) {
  if (traj.points.empty()) return 0.0;
  return path_length(traj, 0, traj.points.size() - 1, crs);
}

Dataset filter_short(const Dataset& ds, double min_length_m) {
  Dataset out;
  out.crs = ds.crs;
  out.day_start = ds.day_start;
  out.day_end = ds.day_end;
  for (const auto& tr : ds.trajectories) {
    if (path_length(tr, ds.crs) > min_length_m) out.trajectories.push_back(tr);
  }
  return out;
}

SliceAxis::SliceAxis(double day_start, double day_end, double delta_t)
    : day_start_(day_start), day_end_(day_end), delta_t_(delta_t), count_(1) {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) throw ConfigError("time slice width must be positive");
  if (!(day_end >= day_start)) throw ConfigError("analysis window end precedes start");
  const double slices = std::ceil((day_end - day_start) / delta_t);
  count_ = std::max<std::size_t>(1, static_cast<std::size_t>(slices));
}

std::optional<std::size_t> SliceAxis::slice_of(double timestamp) const {
  if (timestamp < day_start_ || timestamp > day_end_) return std::nullopt;
  const auto idx = static_cast<std::size_t>(std::floor((timestamp - day_start_) / delta_t_));
  // Only day_end itself can land on index count_ (window an exact multiple of delta_t).
  return std::min(idx, count_ - 1);
}

SliceAxis build_slice_axis(const Dataset& ds, double delta_t) {
  return SliceAxis(ds.day_start, ds.day_end, delta_t);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  nlohmann::json meta = {{"dataset",
                          {{"crs", to_string(ds.crs)}, {"day_start", ds.day_start}, {"day_end", ds.day_end}}}};
  out << meta.dump() << '\n';
  for (const auto& tr : ds.trajectories) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : tr.points) pts.push_back({p.x, p.y, p.t});
    nlohmann::json row = {{"id", tr.id}, {"points", std::move(pts)}};
    out << row.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  if (!in) throw InputError("dataset stream is not readable");
  Dataset ds;
  std::string line;
  bool have_meta = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (row.contains("dataset")) {
        const auto& m = row.at("dataset");
        ds.crs = parse_crs(m.at("crs").get<std::string>());
        ds.day_start = m.at("day_start").get<double>();
        ds.day_end = m.at("day_end").get<double>();
        have_meta = true;
        continue;
      }
      Trajectory tr;
      tr.id = row.at("id").get<std::string>();
      for (const auto& p : row.at("points")) {
        tr.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
      }
      ds.trajectories.push_back(std::move(tr));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_meta && !ds.trajectories.empty()) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& tr : ds.trajectories) {
      for (const auto& p : tr.points) {
        lo = std::min(lo, p.t);
        hi = std::max(hi, p.t);
      }
    }
    ds.day_start = lo;
    ds.day_end = hi;
  }
  try {
    validate(ds);
  } catch (const InvariantError& e) {
    throw InputError(std::string("dataset file: ") + e.what());
  }
  return ds;
}

std::vector<Point> all_points(const Dataset& ds) {
  std::vector<Point> out;
  for (const auto& tr : ds.trajectories) {
    for (const auto& p : tr.points) out.push_back(p.position());
  }
  return out;
}

std::vector<Point> endpoint_points(const Dataset& ds) {
  std::vector<Point> out;
  for (const auto& tr : ds.trajectories) {
    if (tr.points.empty()) continue;
    out.push_back(tr.points.front().position());
    out.push_back(tr.points.back().position());
  }
  return out;
}

}  // namespace tflow

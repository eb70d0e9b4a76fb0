#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tflow/geometry.hpp"

namespace tflow {

struct TrajectoryPoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;  // seconds since epoch

  Point position() const { return {x, y}; }
  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct Trajectory {
  std::string id;
  std::vector<TrajectoryPoint> points;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  Crs crs = Crs::PlanarMeters;
  double day_start = 0.0;
  double day_end = 0.0;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Throws InvariantError naming the first violation.
void validate(const Dataset& ds);

// Column names in the header row of the delimited input.
struct ColumnSchema {
  std::string id = "traj_id";
  std::string x = "x";
  std::string y = "y";
  std::string t = "t";
  char delimiter = ',';
};

// Optional analysis window; points outside it are discarded. When absent the
// window is the data's own time range.
struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
};

struct ParseStats {
  std::size_t rows = 0;
  std::size_t malformed_rows = 0;
  std::size_t duplicate_points = 0;
  std::size_t out_of_window_points = 0;
  std::size_t dropped_trajectories = 0;  // fewer than 2 points after cleaning
};

struct ParseResult {
  Dataset dataset;
  ParseStats stats;
};

// Reads delimited text with a header row. Rows may arrive in any order; they
// are grouped by id (ids sorted) and sorted by time within each trajectory.
// Timestamps are epoch seconds or ISO-8601, detected from the first data row
// and required to be uniform across the file (mismatching rows are malformed).
ParseResult parse_trajectories(std::istream& in, const ColumnSchema& schema, Crs crs,
                               std::optional<TimeWindow> window = std::nullopt);

// ISO-8601 "YYYY-MM-DD[T ]hh:mm[:ss[.fff]][Z|(+|-)hh[:mm]]"; no zone means UTC.
std::optional<double> parse_iso8601(std::string_view text);

double path_length(const Trajectory& traj, Crs crs);

// Path length of the sub-polyline points[first..last] inclusive.
double path_length(const Trajectory& traj, std::size_t first, std::size_t last, Crs crs);

// Keeps trajectories strictly longer than min_length_m, in order.
Dataset filter_short(const Dataset& ds, double min_length_m);

class SliceAxis {
 public:
  SliceAxis(double day_start, double day_end, double delta_t);

  double day_start() const { return day_start_; }
  double day_end() const { return day_end_; }
  double delta_t() const { return delta_t_; }
  std::size_t count() const { return count_; }

  // nullopt outside [day_start, day_end]; day_end maps to the last slice.
  std::optional<std::size_t> slice_of(double timestamp) const;

 private:
  double day_start_;
  double day_end_;
  double delta_t_;
  std::size_t count_;
};

SliceAxis build_slice_axis(const Dataset& ds, double delta_t);

// Canonical line-delimited JSON: {"id":..., "points":[[x,y,t],...]} per line.
// Collection metadata (crs, window) goes in a leading {"dataset":{...}} line.
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);

// Every point of every trajectory, in dataset order.
std::vector<Point> all_points(const Dataset& ds);
// First and last point of each trajectory.
std::vector<Point> endpoint_points(const Dataset& ds);

}  // namespace tflow

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tflow/ingest.hpp"
#include "tflow/partition.hpp"

namespace tflow {

struct Visit {
  CellId cell = 0;
  std::size_t first_point = 0;  // entry
  std::size_t last_point = 0;   // exit
  double entry_time = 0.0;
  double exit_time = 0.0;
};

struct VisitSequence {
  std::string traj_id;
  std::vector<Visit> visits;
};

struct SubTrajectory {
  std::string traj_id;
  CellId origin = 0;
  CellId dest = 0;
  std::size_t slice = 0;
  double distance_m = 0.0;
  double duration_s = 0.0;
};

struct FlowMeasure {
  CellId origin = 0;
  CellId dest = 0;
  std::size_t slice = 0;
  std::size_t count = 0;
  double sum_distance_m = 0.0;
  double sum_duration_s = 0.0;
  double speed_kmh = 0.0;
};

enum class EdgeMethod { All, LowSpeed, HighSpeed };

EdgeMethod parse_edge_method(std::string_view name);
std::string to_string(EdgeMethod method);

using Edge = std::pair<CellId, CellId>;

struct GraphSnapshot {
  std::size_t slice = 0;
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;  // sorted, unique, no self-loops

  bool has_edge(CellId i, CellId j) const;
};

struct GraphSeries {
  std::vector<GraphSnapshot> snapshots;
  SliceAxis axis;
  EdgeMethod method = EdgeMethod::All;
  std::optional<double> threshold_kmh;

  std::size_t vertex_count() const { return snapshots.empty() ? 0 : snapshots.front().vertex_count; }
};

// Maps every point to its region and collapses runs of the same region.
VisitSequence region_visit_sequence(const Trajectory& traj, const CellSet& cells);

struct ExtractStats {
  std::size_t zero_duration_dropped = 0;
  std::size_t outside_window = 0;
};

// One sub-trajectory per ordered visit pair (a < b) with distinct regions.
// The slice is that of the departure from the upstream region.
std::vector<SubTrajectory> extract_subtrajectories(const VisitSequence& vs, const Trajectory& traj,
                                                   const SliceAxis& axis, Crs crs,
                                                   ExtractStats* stats = nullptr);

// Space-mean speed over a group sharing (origin, dest, slice): total distance
// over total time, in km/h. nullopt for an empty group or zero total time.
std::optional<FlowMeasure> edie_speed(std::span<const SubTrajectory> flows);

GraphSnapshot build_snapshot(std::span<const FlowMeasure> measures, std::size_t slice, std::size_t vertex_count,
                             EdgeMethod method, double threshold_kmh = 0.0);

struct FlowTable {
  std::vector<FlowMeasure> measures;  // sorted by (slice, origin, dest)
  std::size_t subtrajectories = 0;
  std::size_t zero_duration_dropped = 0;
};

// Runs visit extraction and Edie aggregation over a whole dataset.
FlowTable measure_flows(const Dataset& ds, const CellSet& cells, const SliceAxis& axis);

GraphSeries build_series(const FlowTable& flows, std::size_t vertex_count, const SliceAxis& axis,
                         EdgeMethod method, double threshold_kmh = 0.0);

struct SweepRow {
  EdgeMethod method = EdgeMethod::LowSpeed;
  double threshold_kmh = 0.0;
  std::size_t slice = 0;
  std::size_t edges = 0;
  double relative_edges = 0.0;
};

// Edge count per (method, threshold, slice) for the low- and high-speed rules,
// with counts normalised by each series' maximum over slices.
std::vector<SweepRow> edge_count_sweep(const FlowTable& flows, std::size_t vertex_count, const SliceAxis& axis,
                                       std::span<const double> thresholds_kmh);

// "5:80:5" -> {5, 10, ..., 80}
std::vector<double> parse_threshold_range(std::string_view spec);

void write_edge_list(std::ostream& out, const GraphSeries& series);
void write_dot(std::ostream& out, const GraphSnapshot& snapshot);
void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows);
void write_flow_table(std::ostream& out, const FlowTable& flows);

}  // namespace tflow

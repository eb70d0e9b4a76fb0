#include "tflow/flowgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include "tflow/error.hpp"

namespace tflow {

namespace {

constexpr double kMpsToKmh = 3.6;

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (const double v : values) total += v;
  return total;
}

bool keeps_edge(const FlowMeasure& m, EdgeMethod method, double threshold_kmh) {
  switch (method) {
    case EdgeMethod::All:
      return true;
    case EdgeMethod::LowSpeed:
      return m.speed_kmh <= threshold_kmh;
    case EdgeMethod::HighSpeed:
      return m.speed_kmh > threshold_kmh;
  }
  return false;
}

}  // namespace

EdgeMethod parse_edge_method(std::string_view name) {
  if (name == "all") return EdgeMethod::All;
  if (name == "low" || name == "low_speed" || name == "low-speed") return EdgeMethod::LowSpeed;
  if (name == "high" || name == "high_speed" || name == "high-speed") return EdgeMethod::HighSpeed;
  throw ConfigError("unknown edge method '" + std::string(name) + "' (expected all, low or high)");
}

std::string to_string(EdgeMethod method) {
  switch (method) {
    case EdgeMethod::All:
      return "all";
    case EdgeMethod::LowSpeed:
      return "low";
    case EdgeMethod::HighSpeed:
      return "high";
  }
  return "all";
}

bool GraphSnapshot::has_edge(CellId i, CellId j) const {
  return std::binary_search(edges.begin(), edges.end(), Edge{i, j});
}

VisitSequence region_visit_sequence(const Trajectory& traj, const CellSet& cells) {
  VisitSequence vs{traj.id, {}};
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    const auto& p = traj.points[k];
    const CellId c = assign_region(p.position(), cells);
    if (!vs.visits.empty() && vs.visits.back().cell == c) {
      vs.visits.back().last_point = k;
      vs.visits.back().exit_time = p.t;
    } else {
      vs.visits.push_back({c, k, k, p.t, p.t});
    }
  }
  return vs;
}

std::vector<SubTrajectory> extract_subtrajectories(const VisitSequence& vs, const Trajectory& traj,
                                                   const SliceAxis& axis, Crs crs, ExtractStats* stats) {
  std::vector<SubTrajectory> out;
  const auto& visits = vs.visits;
  for (std::size_t a = 0; a < visits.size(); ++a) {
    const auto slice = axis.slice_of(visits[a].exit_time);
    for (std::size_t b = a + 1; b < visits.size(); ++b) {
      if (visits[a].cell == visits[b].cell) continue;
      if (!slice) {
        if (stats) ++stats->outside_window;
        continue;
      }
      double tau = visits[b].entry_time - visits[a].exit_time;
      if (tau <= 0.0) tau = visits[b].entry_time - visits[a].entry_time;
      if (tau <= 0.0) {
        if (stats) ++stats->zero_duration_dropped;
        continue;
      }
      const double d = path_length(traj, visits[a].last_point, visits[b].first_point, crs);
      out.push_back({vs.traj_id, visits[a].cell, visits[b].cell, *slice, d, tau});
    }
  }
  return out;
}

std::optional<FlowMeasure> edie_speed(std::span<const SubTrajectory> flows) {
  if (flows.empty()) return std::nullopt;
  std::vector<double> d;
  std::vector<double> tau;
  d.reserve(flows.size());
  tau.reserve(flows.size());
  for (const auto& f : flows) {
    if (f.origin != flows[0].origin || f.dest != flows[0].dest || f.slice != flows[0].slice) {
      throw InvariantError("edie_speed: flows do not share (origin, dest, slice)");
    }
    d.push_back(f.distance_m);
    tau.push_back(f.duration_s);
  }
  FlowMeasure m;
  m.origin = flows[0].origin;
  m.dest = flows[0].dest;
  m.slice = flows[0].slice;
  m.count = flows.size();
  m.sum_distance_m = sorted_sum(std::move(d));
  m.sum_duration_s = sorted_sum(std::move(tau));
  if (!(m.sum_duration_s > 0.0)) return std::nullopt;
  m.speed_kmh = m.sum_distance_m / m.sum_duration_s * kMpsToKmh;
  return m;
}

GraphSnapshot build_snapshot(std::span<const FlowMeasure> measures, std::size_t slice, std::size_t vertex_count,
                             EdgeMethod method, double threshold_kmh) {
  if (method != EdgeMethod::All && !(threshold_kmh > 0.0)) {
    throw ConfigError("speed threshold must be positive for the low/high edge rules");
  }
  GraphSnapshot snap{slice, vertex_count, {}};
  for (const auto& m : measures) {
    if (m.slice != slice || m.count == 0 || m.origin == m.dest) continue;
    if (m.origin >= vertex_count || m.dest >= vertex_count) {
      throw InvariantError("flow measure references a region outside the vertex set");
    }
    if (keeps_edge(m, method, threshold_kmh)) snap.edges.emplace_back(m.origin, m.dest);
  }
  std::sort(snap.edges.begin(), snap.edges.end());
  snap.edges.erase(std::unique(snap.edges.begin(), snap.edges.end()), snap.edges.end());
  return snap;
}

FlowTable measure_flows(const Dataset& ds, const CellSet& cells, const SliceAxis& axis) {
  using Key = std::tuple<std::size_t, CellId, CellId>;
  std::map<Key, std::vector<SubTrajectory>> groups;
  FlowTable table;
  ExtractStats stats;
  for (const auto& tr : ds.trajectories) {
    const auto vs = region_visit_sequence(tr, cells);
    for (auto& sub : extract_subtrajectories(vs, tr, axis, ds.crs, &stats)) {
      ++table.subtrajectories;
      groups[{sub.slice, sub.origin, sub.dest}].push_back(std::move(sub));
    }
  }
  table.zero_duration_dropped = stats.zero_duration_dropped;
  for (const auto& [key, flows] : groups) {
    if (auto m = edie_speed(flows)) {
      table.measures.push_back(*m);
    } else {
      ++table.zero_duration_dropped;
    }
  }
  return table;
}

GraphSeries build_series(const FlowTable& flows, std::size_t vertex_count, const SliceAxis& axis,
                         EdgeMethod method, double threshold_kmh) {
  GraphSeries series{{}, axis, method, std::nullopt};
  if (method != EdgeMethod::All) series.threshold_kmh = threshold_kmh;
  std::vector<std::vector<FlowMeasure>> by_slice(axis.count());
  for (const auto& m : flows.measures) {
    if (m.slice < by_slice.size()) by_slice[m.slice].push_back(m);
  }
  for (std::size_t t = 0; t < axis.count(); ++t) {
    series.snapshots.push_back(build_snapshot(by_slice[t], t, vertex_count, method, threshold_kmh));
  }
  return series;
}

std::vector<SweepRow> edge_count_sweep(const FlowTable& flows, std::size_t vertex_count, const SliceAxis& axis,
                                       std::span<const double> thresholds_kmh) {
  if (thresholds_kmh.empty()) throw ConfigError("threshold sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (const EdgeMethod method : {EdgeMethod::LowSpeed, EdgeMethod::HighSpeed}) {
    for (const double vc : thresholds_kmh) {
      const auto series = build_series(flows, vertex_count, axis, method, vc);
      std::size_t peak = 0;
      for (const auto& s : series.snapshots) peak = std::max(peak, s.edges.size());
      for (const auto& s : series.snapshots) {
        const double rel = peak == 0 ? 0.0 : static_cast<double>(s.edges.size()) / static_cast<double>(peak);
        rows.push_back({method, vc, s.slice, s.edges.size(), rel});
      }
    }
  }
  return rows;
}

std::vector<double> parse_threshold_range(std::string_view spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto pos = std::min(spec.find(':', start), spec.size());
    const auto token = spec.substr(start, pos - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ConfigError("bad threshold range '" + std::string(spec) + "' (expected start:stop:step)");
    }
    parts.push_back(v);
    start = pos + 1;
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || !(parts[0] > 0.0) || parts[1] < parts[0]) {
    throw ConfigError("bad threshold range '" + std::string(spec) + "' (expected start:stop:step)");
  }
  std::vector<double> out;
  const auto steps = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return out;
}

void write_edge_list(std::ostream& out, const GraphSeries& series) {
  out << "t,i,j\n";
  for (const auto& s : series.snapshots) {
    for (const auto& [i, j] : s.edges) out << s.slice << ',' << i << ',' << j << '\n';
  }
}

void write_dot(std::ostream& out, const GraphSnapshot& snapshot) {
  out << "digraph slice_" << snapshot.slice << " {\n";
  for (std::size_t v = 0; v < snapshot.vertex_count; ++v) out << "  " << v << ";\n";
  for (const auto& [i, j] : snapshot.edges) out << "  " << i << " -> " << j << ";\n";
  out << "}\n";
}

void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows) {
  out << "method,v_c,t,edges,relative_edges\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.threshold_kmh << ',' << r.slice << ',' << r.edges << ','
        << r.relative_edges << '\n';
  }
  out.precision(old_precision);
}

void write_flow_table(std::ostream& out, const FlowTable& flows) {
  out << "t,i,j,count,sum_d_m,sum_tau_s,v_kmh\n";
  const auto old_precision = out.precision(17);
  for (const auto& m : flows.measures) {
    out << m.slice << ',' << m.origin << ',' << m.dest << ',' << m.count << ',' << m.sum_distance_m << ','
        << m.sum_duration_s << ',' << m.speed_kmh << '\n';
  }
  out.precision(old_precision);
}

}  // namespace tflow

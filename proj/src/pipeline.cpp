#include "tflow/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tflow/error.hpp"

namespace tflow {

namespace fs = std::filesystem;

namespace {

std::string seed_mode_name(SeedMode m) { return m == SeedMode::AllPoints ? "all-points" : "od-only"; }

SeedMode parse_seed_mode(const std::string& s) {
  if (s == "all-points" || s == "all") return SeedMode::AllPoints;
  if (s == "od-only" || s == "od") return SeedMode::OriginDestination;
  throw ConfigError("unknown seed mode '" + s + "' (expected all-points or od-only)");
}

double parse_time_value(const nlohmann::json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (auto t = parse_iso8601(v.get<std::string>())) return *t;
  }
  throw ConfigError(std::string(key) + " must be epoch seconds or an ISO-8601 string");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void prepare_out_dir(const PipelineConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.out_dir + ": " + ec.message());
  auto out = open_output(fs::path(config.out_dir) / "config.json");
  out << to_json(config).dump(2) << '\n';
}

Dataset merge(std::vector<Dataset> parts) {
  Dataset out = std::move(parts.front());
  std::set<std::string> ids;
  for (const auto& tr : out.trajectories) ids.insert(tr.id);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto& part = parts[i];
    if (part.crs != out.crs) throw InputError("input files disagree on the coordinate system");
    if (!part.trajectories.empty()) {
      if (out.trajectories.empty()) {
        out.day_start = part.day_start;
        out.day_end = part.day_end;
      } else {
        out.day_start = std::min(out.day_start, part.day_start);
        out.day_end = std::max(out.day_end, part.day_end);
      }
    }
    for (auto& tr : part.trajectories) {
      if (!ids.insert(tr.id).second) throw InputError("trajectory id '" + tr.id + "' appears in several inputs");
      out.trajectories.push_back(std::move(tr));
    }
  }
  return out;
}

struct Artifacts {
  LoadedData data;
  CellSet cells;
};

Artifacts load_and_partition(const PipelineConfig& config) {
  Artifacts a{load_inputs(config), {}};
  if (a.data.dataset.trajectories.empty()) {
    throw InputError("no trajectories left after parsing and the trip-length filter");
  }
  a.cells = build_cells(config, a.data.dataset);
  return a;
}

void write_partition_outputs(const PipelineConfig& config, const Dataset& ds, const CellSet& cells) {
  const fs::path dir(config.out_dir);
  {
    auto out = open_output(dir / "cells.csv");
    write_cell_table(out, cells);
  }
  const auto points = all_points(ds);
  const auto polygons = build_voronoi(cells, voronoi_extent(points, cells));
  auto out = open_output(dir / "regions.geojson");
  write_geojson(out, cells, polygons);
}

void write_graph_outputs(const PipelineConfig& config, const GraphStage& g) {
  const fs::path dir(config.out_dir);
  {
    auto out = open_output(dir / "flows.csv");
    write_flow_table(out, g.flows);
  }
  {
    auto out = open_output(dir / "edges.csv");
    write_edge_list(out, g.series);
  }
  const fs::path dot_dir = dir / "graphs";
  std::error_code ec;
  fs::create_directories(dot_dir, ec);
  if (ec) throw ConfigError("cannot create " + dot_dir.string());
  for (const auto& s : g.series.snapshots) {
    char name[32];
    std::snprintf(name, sizeof name, "slice_%02zu.dot", s.slice);
    auto out = open_output(dot_dir / name);
    write_dot(out, s);
  }
}

void write_sweep(const PipelineConfig& config, const GraphStage& g, std::size_t n) {
  const auto rows = edge_count_sweep(g.flows, n, g.axis, config.sweep_kmh);
  auto out = open_output(fs::path(config.out_dir) / "sweep.csv");
  write_sweep_table(out, rows);
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base) {
  static const std::set<std::string> known = {
      "input", "crs", "columns", "delimiter", "window_start", "window_end", "min_trip_length_m", "gamma_m",
      "delta_t_s", "method", "vc_kmh", "seed_mode", "sweep", "out"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("input")) {
      const auto& in = j.at("input");
      base.inputs = in.is_array() ? in.get<std::vector<std::string>>() : std::vector{in.get<std::string>()};
    }
    if (j.contains("crs")) base.crs = parse_crs(j.at("crs").get<std::string>());
    if (j.contains("columns")) {
      const auto& c = j.at("columns");
      base.schema.id = c.value("id", base.schema.id);
      base.schema.x = c.value("x", base.schema.x);
      base.schema.y = c.value("y", base.schema.y);
      base.schema.t = c.value("t", base.schema.t);
    }
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw ConfigError("delimiter must be a single character");
      base.schema.delimiter = d[0];
    }
    if (j.contains("window_start") != j.contains("window_end")) {
      throw ConfigError("window_start and window_end must be given together");
    }
    if (j.contains("window_start")) {
      base.window = TimeWindow{parse_time_value(j.at("window_start"), "window_start"),
                               parse_time_value(j.at("window_end"), "window_end")};
    }
    if (j.contains("min_trip_length_m")) base.min_trip_length_m = j.at("min_trip_length_m").get<double>();
    if (j.contains("gamma_m")) base.gamma_m = j.at("gamma_m").get<double>();
    if (j.contains("delta_t_s")) base.delta_t_s = j.at("delta_t_s").get<double>();
    if (j.contains("method")) base.method = parse_edge_method(j.at("method").get<std::string>());
    if (j.contains("vc_kmh")) base.vc_kmh = j.at("vc_kmh").get<double>();
    if (j.contains("seed_mode")) base.seed_mode = parse_seed_mode(j.at("seed_mode").get<std::string>());
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      base.sweep_kmh = s.is_string() ? parse_threshold_range(s.get<std::string>()) : s.get<std::vector<double>>();
    }
    if (j.contains("out")) base.out_dir = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return base;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j = {{"input", c.inputs},
                      {"crs", to_string(c.crs)},
                      {"columns", {{"id", c.schema.id}, {"x", c.schema.x}, {"y", c.schema.y}, {"t", c.schema.t}}},
                      {"delimiter", std::string(1, c.schema.delimiter)},
                      {"min_trip_length_m", c.min_trip_length_m},
                      {"gamma_m", c.gamma_m},
                      {"delta_t_s", c.delta_t_s},
                      {"method", to_string(c.method)},
                      {"vc_kmh", c.vc_kmh},
                      {"seed_mode", seed_mode_name(c.seed_mode)},
                      {"sweep", c.sweep_kmh},
                      {"out", c.out_dir}};
  if (c.window) {
    j["window_start"] = c.window->start;
    j["window_end"] = c.window->end;
  }
  return j;
}

LoadedData load_inputs(const PipelineConfig& config) {
  if (config.inputs.empty()) throw ConfigError("no input file given");
  if (config.min_trip_length_m < 0.0) throw ConfigError("minimum trip length must be non-negative");
  LoadedData loaded;
  std::vector<Dataset> parts;
  for (const auto& path : config.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input " + path);
    if (ends_with(path, ".jsonl") || ends_with(path, ".ndjson")) {
      parts.push_back(read_dataset(in));
      if (config.window) {
        // Canonical files carry their own window; restrict to the configured one.
        std::stringstream csv;
        csv << "traj_id,x,y,t\n";
        csv.precision(17);
        for (const auto& tr : parts.back().trajectories) {
          for (const auto& p : tr.points) csv << tr.id << ',' << p.x << ',' << p.y << ',' << p.t << '\n';
        }
        auto res = parse_trajectories(csv, ColumnSchema{}, parts.back().crs, config.window);
        loaded.stats.out_of_window_points += res.stats.out_of_window_points;
        loaded.stats.dropped_trajectories += res.stats.dropped_trajectories;
        parts.back() = std::move(res.dataset);
      }
    } else {
      auto res = parse_trajectories(in, config.schema, config.crs, config.window);
      loaded.stats.rows += res.stats.rows;
      loaded.stats.malformed_rows += res.stats.malformed_rows;
      loaded.stats.duplicate_points += res.stats.duplicate_points;
      loaded.stats.out_of_window_points += res.stats.out_of_window_points;
      loaded.stats.dropped_trajectories += res.stats.dropped_trajectories;
      parts.push_back(std::move(res.dataset));
    }
  }
  Dataset merged = merge(std::move(parts));
  loaded.before_filter = merged.trajectories.size();
  loaded.dataset = filter_short(merged, config.min_trip_length_m);
  validate(loaded.dataset);
  return loaded;
}

CellSet build_cells(const PipelineConfig& config, const Dataset& ds) {
  const auto seeds = config.seed_mode == SeedMode::AllPoints ? all_points(ds) : endpoint_points(ds);
  return group_seed_points(seeds, config.gamma_m, ds.crs);
}

GraphStage build_graphs(const PipelineConfig& config, const Dataset& ds, const CellSet& cells) {
  auto axis = build_slice_axis(ds, config.delta_t_s);
  auto flows = measure_flows(ds, cells, axis);
  auto series = build_series(flows, cells.size(), axis, config.method, config.vc_kmh);
  return {std::move(axis), std::move(flows), std::move(series)};
}

nlohmann::json report_to_json(const mdl::ChangePointReport& report, const GraphSeries& series) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : report.segments) {
    segments.push_back({{"first_slice", s.first_slice},
                        {"last_slice", s.last_slice},
                        {"k", s.partitioning.k},
                        {"l", s.partitioning.l},
                        {"row_groups", s.partitioning.row_group},
                        {"col_groups", s.partitioning.col_group},
                        {"total_cost_bits", s.total_cost},
                        {"cost_per_hour", s.cost_per_hour}});
  }
  nlohmann::json j = {{"change_points", report.change_points},
                      {"segments", std::move(segments)},
                      {"total_cost_bits", report.total_cost()},
                      {"slices", series.snapshots.size()},
                      {"vertices", series.vertex_count()},
                      {"day_start", series.axis.day_start()},
                      {"delta_t_s", series.axis.delta_t()},
                      {"method", to_string(series.method)}};
  j["v_c_kmh"] = series.threshold_kmh ? nlohmann::json(*series.threshold_kmh) : nlohmann::json(nullptr);
  return j;
}

std::string run_partition(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto a = load_and_partition(config);
  write_partition_outputs(config, a.data.dataset, a.cells);
  std::string summary = "trajectories: " + std::to_string(a.data.dataset.trajectories.size()) +
                        ", cells: " + std::to_string(a.cells.size());
  if (a.cells.empty_cells > 0) summary += " (" + std::to_string(a.cells.empty_cells) + " left empty)";
  return summary;
}

std::string run_build_graphs(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto a = load_and_partition(config);
  write_partition_outputs(config, a.data.dataset, a.cells);
  const auto g = build_graphs(config, a.data.dataset, a.cells);
  write_graph_outputs(config, g);
  std::size_t edges = 0;
  for (const auto& s : g.series.snapshots) edges += s.edges.size();
  return "cells: " + std::to_string(a.cells.size()) + ", slices: " + std::to_string(g.axis.count()) +
         ", edges: " + std::to_string(edges);
}

std::string run_detect(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto a = load_and_partition(config);
  write_partition_outputs(config, a.data.dataset, a.cells);
  const auto g = build_graphs(config, a.data.dataset, a.cells);
  write_graph_outputs(config, g);
  if (!config.sweep_kmh.empty()) write_sweep(config, g, a.cells.size());

  const auto report = mdl::detect_change_points(g.series);
  const fs::path dir(config.out_dir);
  {
    auto out = open_output(dir / "report.json");
    out << report_to_json(report, g.series).dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "segments.txt");
    const auto matrices = mdl::to_matrices(g.series);
    for (std::size_t s = 0; s < report.segments.size(); ++s) {
      const auto& seg = report.segments[s];
      out << "segment " << s << ": slices " << seg.first_slice << '-' << seg.last_slice
          << ", total_cost_bits " << seg.total_cost << ", cost_per_hour " << seg.cost_per_hour << '\n';
      mdl::SegmentCounts counts(std::span<const mdl::BinaryMatrix>(matrices).subspan(seg.first_slice, seg.last_slice - seg.first_slice + 1));
      mdl::write_partitioned_matrix(out, counts, seg.partitioning);
      out << '\n';
    }
  }
  return "cells: " + std::to_string(a.cells.size()) + ", slices: " + std::to_string(g.axis.count()) +
         ", change points: " + join(report.change_points);
}

std::string run_sweep(const PipelineConfig& config) {
  if (config.sweep_kmh.empty()) throw ConfigError("sweep needs thresholds (--sweep start:stop:step)");
  prepare_out_dir(config);
  const auto a = load_and_partition(config);
  const auto g = build_graphs(config, a.data.dataset, a.cells);
  {
    auto out = open_output(fs::path(config.out_dir) / "flows.csv");
    write_flow_table(out, g.flows);
  }
  write_sweep(config, g, a.cells.size());
  return "cells: " + std::to_string(a.cells.size()) + ", thresholds: " + std::to_string(config.sweep_kmh.size());
}

}  // namespace tflow

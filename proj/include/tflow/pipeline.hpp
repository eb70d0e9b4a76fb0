#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tflow/flowgraph.hpp"
#include "tflow/ingest.hpp"
#include "tflow/mdl.hpp"
#include "tflow/partition.hpp"

namespace tflow {

enum class SeedMode { AllPoints, OriginDestination };

struct PipelineConfig {
  std::vector<std::string> inputs;
  Crs crs = Crs::PlanarMeters;
  ColumnSchema schema;
  std::optional<TimeWindow> window;
  double min_trip_length_m = 3000.0;
  double gamma_m = 3000.0;
  double delta_t_s = 3600.0;
  EdgeMethod method = EdgeMethod::LowSpeed;
  double vc_kmh = 20.0;
  SeedMode seed_mode = SeedMode::AllPoints;
  std::vector<double> sweep_kmh;  // empty: no sweep table
  std::string out_dir = "out";
};

// Unknown keys are rejected. Window bounds accept epoch seconds or ISO-8601.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::json to_json(const PipelineConfig& config);

struct LoadedData {
  Dataset dataset;  // after the trip-length filter
  ParseStats stats;
  std::size_t before_filter = 0;
};

// CSV, or canonical JSONL when the file ends in .jsonl / .ndjson.
LoadedData load_inputs(const PipelineConfig& config);

CellSet build_cells(const PipelineConfig& config, const Dataset& ds);

struct GraphStage {
  SliceAxis axis;
  FlowTable flows;
  GraphSeries series;
};

GraphStage build_graphs(const PipelineConfig& config, const Dataset& ds, const CellSet& cells);

nlohmann::json report_to_json(const mdl::ChangePointReport& report, const GraphSeries& series);

// Stage drivers behind the CLI subcommands; each writes its artifacts and the
// resolved config into config.out_dir and returns a one-line summary.
std::string run_partition(const PipelineConfig& config);
std::string run_build_graphs(const PipelineConfig& config);
std::string run_detect(const PipelineConfig& config);
std::string run_sweep(const PipelineConfig& config);

}  // namespace tflow

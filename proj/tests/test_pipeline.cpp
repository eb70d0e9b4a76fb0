#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tflow/error.hpp"
#include "tflow/pipeline.hpp"
#include "tflow/synth.hpp"

using namespace tflow;
namespace fs = std::filesystem;

namespace {

std::string serialize(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generator is deterministic per seed") {
  auto p = synth::star_flip_preset();
  p.seed = 9;
  CHECK(serialize(synth::generate(p)) == serialize(synth::generate(p)));
  auto q = p;
  q.seed = 10;
  CHECK(serialize(synth::generate(p)) != serialize(synth::generate(q)));
}

TEST_CASE("star-in slices point at the hub") {
  const auto p = synth::star_flip_preset();
  const auto ds = synth::generate(p);
  CHECK_NOTHROW(validate(ds));
  PipelineConfig config;
  config.method = EdgeMethod::All;
  const auto cells = build_cells(config, filter_short(ds, config.min_trip_length_m));
  REQUIRE(cells.size() == p.regions());
  const auto g = build_graphs(config, ds, cells);
  REQUIRE(g.series.snapshots.size() == p.slices);
  const auto hub = assign_region(synth::region_center(p, p.hub), cells);
  for (std::size_t t = 0; t < 5; ++t) {
    const auto& s = g.series.snapshots[t];
    CHECK(s.edges.size() == p.regions() - 1);
    for (const auto& [i, j] : s.edges) CHECK(j == hub);
  }
  for (std::size_t t = 5; t < 10; ++t) {
    for (const auto& [i, j] : g.series.snapshots[t].edges) CHECK(i == hub);
  }
}

TEST_CASE("generator parameter validation") {
  auto p = synth::star_flip_preset();
  p.hub = 99;
  CHECK_THROWS_AS(synth::generate(p), ConfigError);
  p = synth::star_flip_preset();
  p.regimes[0].last_slice = 50;
  CHECK_THROWS_AS(synth::generate(p), ConfigError);
  CHECK_THROWS_AS(synth::preset("nope"), ConfigError);
  const auto round = synth::params_from_json(synth::to_json(synth::day_profile_preset()));
  CHECK(synth::to_json(round) == synth::to_json(synth::day_profile_preset()));
}

TEST_CASE("config parsing and echo") {
  const auto j = nlohmann::json::parse(R"({"input": "a.csv", "gamma_m": 2500, "method": "high",
      "vc_kmh": 30, "sweep": "5:15:5", "window_start": "2013-03-12T05:00:00Z", "window_end": 1363132800})");
  const auto c = config_from_json(j);
  CHECK(c.inputs == std::vector<std::string>{"a.csv"});
  CHECK(c.gamma_m == 2500.0);
  CHECK(c.delta_t_s == 3600.0);
  CHECK(c.min_trip_length_m == 3000.0);
  CHECK(c.method == EdgeMethod::HighSpeed);
  CHECK(c.sweep_kmh == std::vector<double>{5, 10, 15});
  REQUIRE(c.window);
  CHECK(c.window->start == 1363064400.0);
  const auto again = config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"gama_m": 1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"method": "fast"})")), ConfigError);
}

TEST_CASE("detect writes identical artifacts on repeat runs") {
  const auto dir = scratch("detect");
  {
    std::ofstream out(dir / "in.jsonl");
    write_dataset(out, synth::generate(synth::star_flip_preset()));
  }
  PipelineConfig config;
  config.inputs = {(dir / "in.jsonl").string()};
  config.method = EdgeMethod::All;
  config.sweep_kmh = {10, 20, 40};
  config.out_dir = (dir / "a").string();
  const auto summary = run_detect(config);
  CHECK(summary.find("change points: [5]") != std::string::npos);
  config.out_dir = (dir / "b").string();
  run_detect(config);
  for (const char* f : {"report.json", "cells.csv", "edges.csv", "flows.csv", "sweep.csv", "segments.txt",
                        "regions.geojson", "graphs/slice_00.dot"}) {
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
    CHECK(!slurp(dir / "a" / f).empty());
  }
  const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report["change_points"] == nlohmann::json::array({5}));
  CHECK(report["segments"].size() == 2);
  CHECK(report["segments"][0].contains("cost_per_hour"));
  const auto echoed = nlohmann::json::parse(slurp(dir / "a" / "config.json"));
  CHECK(echoed["method"] == "all");
  fs::remove_all(dir);
}

TEST_CASE("single-slice window reports no change points") {
  const auto dir = scratch("single");
  {
    std::ofstream out(dir / "in.csv");
    out << "traj_id,x,y,t\na,0,0,0\na,5000,0,600\nb,5000,0,100\nb,0,0,700\n";
  }
  PipelineConfig config;
  config.inputs = {(dir / "in.csv").string()};
  config.out_dir = (dir / "out").string();
  config.method = EdgeMethod::All;
  CHECK(run_detect(config).find("change points: []") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("input errors surface") {
  const auto dir = scratch("errors");
  PipelineConfig config;
  config.out_dir = (dir / "out").string();
  CHECK_THROWS_AS(run_partition(config), ConfigError);
  config.inputs = {(dir / "missing.csv").string()};
  CHECK_THROWS_AS(run_partition(config), InputError);
  {
    std::ofstream out(dir / "empty.csv");
  }
  config.inputs = {(dir / "empty.csv").string()};
  CHECK_THROWS_AS(run_partition(config), InputError);
  {
    std::ofstream out(dir / "dup.csv");
    out << "traj_id,x,y,t\na,0,0,0\na,5000,0,600\n";
  }
  config.inputs = {(dir / "dup.csv").string(), (dir / "dup.csv").string()};
  CHECK_THROWS_AS(run_partition(config), InputError);
  fs::remove_all(dir);
}

TEST_CASE("od-only seeds use trip endpoints") {
  Dataset ds;
  ds.day_end = 100;
  ds.trajectories = {{"a", {{0, 0, 0}, {50000, 0, 50}, {100000, 0, 100}}}};
  PipelineConfig config;
  config.seed_mode = SeedMode::OriginDestination;
  CHECK(build_cells(config, ds).size() == 2);
  config.seed_mode = SeedMode::AllPoints;
  CHECK(build_cells(config, ds).size() == 3);
}

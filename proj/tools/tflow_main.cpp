#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tflow/error.hpp"
#include "tflow/pipeline.hpp"
#include "tflow/synth.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::vector<std::string> inputs;
  std::optional<std::string> crs;
  std::optional<std::string> id_col, x_col, y_col, t_col;
  std::optional<std::string> window_start, window_end;
  std::optional<double> min_trip_m;
  std::optional<double> gamma_m;
  std::optional<double> delta_t_s;
  std::optional<std::string> method;
  std::optional<double> vc_kmh;
  std::optional<std::string> seed_mode;
  std::optional<std::string> sweep;
  std::optional<std::string> out;
};

void add_pipeline_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
  cmd->add_option("--input", f.inputs, "trajectory CSV or canonical JSONL (repeatable)");
  cmd->add_option("--crs", f.crs, "planar (meters) or geographic (lon/lat degrees)");
  cmd->add_option("--id-col", f.id_col, "trajectory id column");
  cmd->add_option("--x-col", f.x_col, "x / longitude column");
  cmd->add_option("--y-col", f.y_col, "y / latitude column");
  cmd->add_option("--t-col", f.t_col, "timestamp column (epoch seconds or ISO-8601)");
  cmd->add_option("--window-start", f.window_start, "analysis window start");
  cmd->add_option("--window-end", f.window_end, "analysis window end");
  cmd->add_option("--min-trip-m", f.min_trip_m, "drop trajectories not longer than this");
  cmd->add_option("--gamma-m", f.gamma_m, "cell radius");
  cmd->add_option("--delta-t-s", f.delta_t_s, "time slice width");
  cmd->add_option("--method", f.method, "edge rule: all, low or high");
  cmd->add_option("--vc-kmh", f.vc_kmh, "speed threshold for low/high");
  cmd->add_option("--seed-mode", f.seed_mode, "all-points or od-only");
  cmd->add_option("--sweep", f.sweep, "threshold range start:stop:step in km/h");
  cmd->add_option("--out", f.out, "output directory");
}

tflow::PipelineConfig resolve(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw tflow::ConfigError("cannot open config " + f.config_path);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw tflow::ConfigError("config " + f.config_path + ": " + e.what());
    }
    if (!j.is_object()) throw tflow::ConfigError("config must be a JSON object");
  }
  if (!f.inputs.empty()) j["input"] = f.inputs;
  if (f.crs) j["crs"] = *f.crs;
  auto column = [&](const char* key, const std::optional<std::string>& v) {
    if (v) j["columns"][key] = *v;
  };
  column("id", f.id_col);
  column("x", f.x_col);
  column("y", f.y_col);
  column("t", f.t_col);
  auto time_value = [](const std::string& s) -> nlohmann::json {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return s;
  };
  if (f.window_start) j["window_start"] = time_value(*f.window_start);
  if (f.window_end) j["window_end"] = time_value(*f.window_end);
  if (f.min_trip_m) j["min_trip_length_m"] = *f.min_trip_m;
  if (f.gamma_m) j["gamma_m"] = *f.gamma_m;
  if (f.delta_t_s) j["delta_t_s"] = *f.delta_t_s;
  if (f.method) j["method"] = *f.method;
  if (f.vc_kmh) j["vc_kmh"] = *f.vc_kmh;
  if (f.seed_mode) j["seed_mode"] = *f.seed_mode;
  if (f.sweep) j["sweep"] = *f.sweep;
  if (f.out) j["out"] = *f.out;
  auto config = tflow::config_from_json(j);
  if (!(config.gamma_m > 0.0)) throw tflow::ConfigError("gamma must be positive");
  if (!(config.delta_t_s > 0.0)) throw tflow::ConfigError("delta_t must be positive");
  return config;
}

struct SynthFlags {
  std::string preset = "star-flip";
  std::string params_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::string out;
  std::string format = "jsonl";
};

void write_csv(std::ostream& out, const tflow::Dataset& ds) {
  out << "traj_id,x,y,t\n";
  out.precision(17);
  for (const auto& tr : ds.trajectories) {
    for (const auto& p : tr.points) out << tr.id << ',' << p.x << ',' << p.y << ',' << p.t << '\n';
  }
}

void run_synth(const SynthFlags& f) {
  auto params = tflow::synth::preset(f.preset);
  if (!f.params_path.empty()) {
    std::ifstream in(f.params_path);
    if (!in) throw tflow::ConfigError("cannot open synth parameters " + f.params_path);
    try {
      params = tflow::synth::params_from_json(nlohmann::json::parse(in), params);
    } catch (const nlohmann::json::parse_error& e) {
      throw tflow::ConfigError(std::string("synth parameters: ") + e.what());
    }
  }
  if (f.seed) params.seed = *f.seed;
  if (f.noise) params.noise_rate = *f.noise;
  if (f.format != "jsonl" && f.format != "csv") throw tflow::ConfigError("format must be jsonl or csv");
  const auto ds = tflow::synth::generate(params);

  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary | std::ios::trunc);
    if (!file) throw tflow::ConfigError("cannot write " + f.out);
  }
  std::ostream& out = f.out.empty() ? std::cout : file;
  if (f.format == "csv") {
    write_csv(out, ds);
  } else {
    tflow::write_dataset(out, ds);
  }
  if (!f.out.empty()) std::cerr << "trajectories: " << ds.trajectories.size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tflow: trajectory flow graphs and MDL change point detection"};
  app.require_subcommand(1);

  Flags flags;
  auto* partition = app.add_subcommand("partition", "group seed points into cells, write cells.csv and regions.geojson");
  auto* graphs = app.add_subcommand("build-graphs", "partition, then build per-slice flow graphs");
  auto* detect = app.add_subcommand("detect", "full pipeline with change point detection");
  auto* sweep = app.add_subcommand("sweep", "edge counts over a range of speed thresholds");
  for (auto* cmd : {partition, graphs, detect, sweep}) add_pipeline_flags(cmd, flags);

  SynthFlags sflags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic trajectory corpus");
  synth->add_option("--preset", sflags.preset, "star-flip, three-regime or day");
  synth->add_option("--synth-config", sflags.params_path, "JSON generator parameters (override the preset)");
  synth->add_option("--seed", sflags.seed, "rng seed");
  synth->add_option("--noise", sflags.noise, "fraction of pattern trips replaced by random ones");
  synth->add_option("--out", sflags.out, "output file (stdout if omitted)");
  synth->add_option("--format", sflags.format, "jsonl or csv");

  std::vector<std::string> export_inputs;
  std::string export_out;
  Flags eflags;
  auto* exp = app.add_subcommand("export", "parse CSV input and write the canonical JSONL dataset");
  exp->add_option("--config", eflags.config_path, "JSON config file");
  exp->add_option("--input", eflags.inputs, "trajectory CSV (repeatable)");
  exp->add_option("--crs", eflags.crs, "planar or geographic");
  exp->add_option("--min-trip-m", eflags.min_trip_m, "drop trajectories not longer than this");
  exp->add_option("--window-start", eflags.window_start, "analysis window start");
  exp->add_option("--window-end", eflags.window_end, "analysis window end");
  exp->add_option("--out", export_out, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      run_synth(sflags);
    } else if (*exp) {
      const auto config = resolve(eflags);
      const auto loaded = tflow::load_inputs(config);
      if (loaded.dataset.trajectories.empty()) throw tflow::InputError("no trajectories to export");
      std::ofstream file;
      if (!export_out.empty()) {
        file.open(export_out, std::ios::binary | std::ios::trunc);
        if (!file) throw tflow::ConfigError("cannot write " + export_out);
      }
      tflow::write_dataset(export_out.empty() ? std::cout : file, loaded.dataset);
    } else {
      const auto config = resolve(flags);
      std::string summary;
      if (*partition) summary = tflow::run_partition(config);
      if (*graphs) summary = tflow::run_build_graphs(config);
      if (*detect) summary = tflow::run_detect(config);
      if (*sweep) summary = tflow::run_sweep(config);
      std::cout << summary << '\n';
    }
  } catch (const tflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const tflow::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tflow/ingest.hpp"

namespace tflow::synth {

enum class Pattern {
  StarIn,   // every spoke region -> hub (many-to-one)
  StarOut,  // hub -> every spoke region (one-to-many)
  Random,   // uniformly random distinct region pairs
  Empty,
};

struct Regime {
  std::size_t first_slice = 0;
  std::size_t last_slice = 0;
  Pattern pattern = Pattern::Empty;
  std::size_t trips_per_slice = 0;  // star patterns cycle through the spokes
  double speed_kmh = 30.0;
  // Extra random-pair trips per slice on top of the pattern.
  std::size_t random_trips = 0;
  double random_speed_kmh = 30.0;
};

struct Params {
  std::size_t grid_cols = 5;
  std::size_t grid_rows = 4;
  double spacing_m = 4000.0;
  double jitter_m = 250.0;
  std::size_t hub = 7;  // region index, row-major over the grid
  double day_start = 1363064400.0;  // 2013-03-12 05:00 UTC
  double delta_t_s = 3600.0;
  std::size_t slices = 19;
  std::vector<Regime> regimes;
  // Fraction of pattern trips replaced by a random pair at a random speed.
  double noise_rate = 0.0;
  double noise_min_speed_kmh = 5.0;
  double noise_max_speed_kmh = 60.0;
  // Per-trip multiplicative speed spread, uniform in [1 - s, 1 + s].
  double speed_spread = 0.1;
  std::uint64_t seed = 1;

  std::size_t regions() const { return grid_cols * grid_rows; }
};

// Regime schedules reused by tests and the CLI.
Params star_flip_preset();     // 6 regions, 10 slices: in-star then out-star
Params three_regime_preset();  // 20 regions, 19 slices: in-star / sparse / out-star
Params day_profile_preset();   // 20 regions, 19 slices: quiet / morning / midday / evening / quiet

Params preset(const std::string& name);
Params params_from_json(const nlohmann::json& j, Params base = {});
nlohmann::json to_json(const Params& p);

// Region centre in planar meters.
Point region_center(const Params& p, std::size_t region);

// Trips realising the schedule. Each trip dwells at its origin (3 points),
// travels straight to its destination at the trip speed and dwells there
// (3 points); the window is [day_start, day_start + slices * delta_t].
// Deterministic for a fixed seed. Trips that cannot finish inside the window
// are skipped.
Dataset generate(const Params& p);

}  // namespace tflow::synth

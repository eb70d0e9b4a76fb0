#include "tflow/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "tflow/error.hpp"

namespace tflow::synth {

namespace {

constexpr double kDwellStepS = 60.0;

Pattern parse_pattern(const std::string& name) {
  if (name == "star_in") return Pattern::StarIn;
  if (name == "star_out") return Pattern::StarOut;
  if (name == "random") return Pattern::Random;
  if (name == "empty") return Pattern::Empty;
  throw ConfigError("unknown synth pattern '" + name + "' (expected star_in, star_out, random, empty)");
}

std::string pattern_name(Pattern p) {
  switch (p) {
    case Pattern::StarIn:
      return "star_in";
    case Pattern::StarOut:
      return "star_out";
    case Pattern::Random:
      return "random";
    case Pattern::Empty:
      return "empty";
  }
  return "empty";
}

void check(const Params& p) {
  if (p.grid_cols == 0 || p.grid_rows == 0 || p.regions() < 2) throw ConfigError("synth grid needs >= 2 regions");
  if (p.hub >= p.regions()) throw ConfigError("synth hub index outside the grid");
  if (!(p.spacing_m > 0.0) || p.jitter_m < 0.0 || p.jitter_m * 2.0 >= p.spacing_m) {
    throw ConfigError("synth spacing must be positive and exceed twice the jitter");
  }
  if (!(p.delta_t_s > 0.0) || p.slices == 0) throw ConfigError("synth slice axis must be non-empty");
  if (p.noise_rate < 0.0 || p.noise_rate > 1.0) throw ConfigError("synth noise rate must lie in [0, 1]");
  if (p.speed_spread < 0.0 || p.speed_spread >= 1.0) throw ConfigError("synth speed spread must lie in [0, 1)");
  if (!(p.noise_min_speed_kmh > 0.0) || p.noise_max_speed_kmh < p.noise_min_speed_kmh) {
    throw ConfigError("synth noise speed range is invalid");
  }
  for (const auto& r : p.regimes) {
    if (r.first_slice > r.last_slice || r.last_slice >= p.slices) {
      throw ConfigError("synth regime slice range is outside the axis");
    }
    if (!(r.speed_kmh > 0.0) || !(r.random_speed_kmh > 0.0)) throw ConfigError("synth speeds must be positive");
  }
}

class TripWriter {
 public:
  TripWriter(const Params& p, std::mt19937_64& rng, Dataset& out) : p_(p), rng_(rng), out_(out) {}

  void emit(std::size_t slice, std::size_t origin, std::size_t dest, double speed_kmh) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double slice_start = p_.day_start + static_cast<double>(slice) * p_.delta_t_s;
    double t = slice_start + unit(rng_) * 0.1 * p_.delta_t_s;
    Trajectory tr;
    char id[32];
    std::snprintf(id, sizeof id, "trip-%06zu", counter_++);
    tr.id = id;
    const Point o = region_center(p_, origin);
    const Point d = region_center(p_, dest);
    for (int i = 0; i < 3; ++i) {
      const Point q = jitter(o);
      tr.points.push_back({q.x, q.y, t});
      t += kDwellStepS;
    }
    t -= kDwellStepS;
    const Point arrive = jitter(d);
    const auto& last = tr.points.back();
    t += euclidean_distance(last.position(), arrive) / (speed_kmh / 3.6);
    tr.points.push_back({arrive.x, arrive.y, t});
    for (int i = 0; i < 2; ++i) {
      t += kDwellStepS;
      const Point q = jitter(d);
      tr.points.push_back({q.x, q.y, t});
    }
    if (t > out_.day_end) return;
    out_.trajectories.push_back(std::move(tr));
  }

 private:
  Point jitter(Point c) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = p_.jitter_m * std::sqrt(unit(rng_));
    const double a = 2.0 * std::numbers::pi * unit(rng_);
    return {c.x + r * std::cos(a), c.y + r * std::sin(a)};
  }

  const Params& p_;
  std::mt19937_64& rng_;
  Dataset& out_;
  std::size_t counter_ = 0;
};

}  // namespace

Point region_center(const Params& p, std::size_t region) {
  const auto row = region / p.grid_cols;
  const auto col = region % p.grid_cols;
  return {static_cast<double>(col) * p.spacing_m, static_cast<double>(row) * p.spacing_m};
}

Params star_flip_preset() {
  Params p;
  p.grid_cols = 3;
  p.grid_rows = 2;
  p.hub = 1;
  p.slices = 10;
  p.regimes = {{0, 4, Pattern::StarIn, 10, 30.0, 0, 30.0}, {5, 9, Pattern::StarOut, 10, 30.0, 0, 30.0}};
  return p;
}

Params three_regime_preset() {
  Params p;
  p.regimes = {{0, 6, Pattern::StarIn, 38, 15.0, 2, 15.0},
               {7, 12, Pattern::Random, 6, 35.0, 0, 35.0},
               {13, 18, Pattern::StarOut, 38, 15.0, 2, 15.0}};
  return p;
}

Params day_profile_preset() {
  Params p;
  p.regimes = {{0, 0, Pattern::Random, 3, 40.0, 0, 40.0},
               {1, 3, Pattern::StarIn, 57, 15.0, 12, 15.0},
               {4, 9, Pattern::Random, 8, 35.0, 2, 15.0},
               {10, 13, Pattern::StarOut, 38, 15.0, 3, 15.0},
               {14, 18, Pattern::Random, 3, 40.0, 0, 40.0}};
  return p;
}

Params preset(const std::string& name) {
  if (name == "star-flip") return star_flip_preset();
  if (name == "three-regime") return three_regime_preset();
  if (name == "day") return day_profile_preset();
  throw ConfigError("unknown synth preset '" + name + "' (expected star-flip, three-regime, day)");
}

Params params_from_json(const nlohmann::json& j, Params base) {
  try {
    if (j.contains("preset")) base = preset(j.at("preset").get<std::string>());
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("grid_cols", base.grid_cols);
    take("grid_rows", base.grid_rows);
    take("spacing_m", base.spacing_m);
    take("jitter_m", base.jitter_m);
    take("hub", base.hub);
    take("day_start", base.day_start);
    take("delta_t_s", base.delta_t_s);
    take("slices", base.slices);
    take("noise_rate", base.noise_rate);
    take("noise_min_speed_kmh", base.noise_min_speed_kmh);
    take("noise_max_speed_kmh", base.noise_max_speed_kmh);
    take("speed_spread", base.speed_spread);
    take("seed", base.seed);
    if (j.contains("regimes")) {
      base.regimes.clear();
      for (const auto& r : j.at("regimes")) {
        Regime reg;
        reg.first_slice = r.at("first_slice").get<std::size_t>();
        reg.last_slice = r.at("last_slice").get<std::size_t>();
        reg.pattern = parse_pattern(r.at("pattern").get<std::string>());
        reg.trips_per_slice = r.value("trips_per_slice", std::size_t{0});
        reg.speed_kmh = r.value("speed_kmh", 30.0);
        reg.random_trips = r.value("random_trips", std::size_t{0});
        reg.random_speed_kmh = r.value("random_speed_kmh", reg.speed_kmh);
        base.regimes.push_back(reg);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth parameters: ") + e.what());
  }
  return base;
}

nlohmann::json to_json(const Params& p) {
  nlohmann::json regimes = nlohmann::json::array();
  for (const auto& r : p.regimes) {
    regimes.push_back({{"first_slice", r.first_slice},
                       {"last_slice", r.last_slice},
                       {"pattern", pattern_name(r.pattern)},
                       {"trips_per_slice", r.trips_per_slice},
                       {"speed_kmh", r.speed_kmh},
                       {"random_trips", r.random_trips},
                       {"random_speed_kmh", r.random_speed_kmh}});
  }
  return {{"grid_cols", p.grid_cols},
          {"grid_rows", p.grid_rows},
          {"spacing_m", p.spacing_m},
          {"jitter_m", p.jitter_m},
          {"hub", p.hub},
          {"day_start", p.day_start},
          {"delta_t_s", p.delta_t_s},
          {"slices", p.slices},
          {"noise_rate", p.noise_rate},
          {"noise_min_speed_kmh", p.noise_min_speed_kmh},
          {"noise_max_speed_kmh", p.noise_max_speed_kmh},
          {"speed_spread", p.speed_spread},
          {"seed", p.seed},
          {"regimes", std::move(regimes)}};
}

Dataset generate(const Params& p) {
  check(p);
  Dataset out;
  out.crs = Crs::PlanarMeters;
  out.day_start = p.day_start;
  out.day_end = p.day_start + static_cast<double>(p.slices) * p.delta_t_s;

  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_region(0, p.regions() - 1);
  std::uniform_int_distribution<std::size_t> other_region(0, p.regions() - 2);
  auto random_pair = [&] {
    const std::size_t o = any_region(rng);
    std::size_t d = other_region(rng);
    if (d >= o) ++d;
    return std::pair{o, d};
  };
  auto spread = [&](double speed) { return speed * (1.0 + p.speed_spread * (2.0 * unit(rng) - 1.0)); };

  std::vector<std::size_t> spokes;
  for (std::size_t r = 0; r < p.regions(); ++r) {
    if (r != p.hub) spokes.push_back(r);
  }

  TripWriter writer(p, rng, out);
  for (const auto& regime : p.regimes) {
    for (std::size_t s = regime.first_slice; s <= regime.last_slice; ++s) {
      if (regime.pattern != Pattern::Empty) {
        for (std::size_t i = 0; i < regime.trips_per_slice; ++i) {
          std::pair<std::size_t, std::size_t> od;
          double speed = 0.0;
          switch (regime.pattern) {
            case Pattern::StarIn:
              od = {spokes[i % spokes.size()], p.hub};
              break;
            case Pattern::StarOut:
              od = {p.hub, spokes[i % spokes.size()]};
              break;
            default:
              od = random_pair();
              break;
          }
          speed = spread(regime.speed_kmh);
          if (p.noise_rate > 0.0 && unit(rng) < p.noise_rate) {
            od = random_pair();
            speed = p.noise_min_speed_kmh + unit(rng) * (p.noise_max_speed_kmh - p.noise_min_speed_kmh);
          }
          writer.emit(s, od.first, od.second, speed);
        }
      }
      for (std::size_t i = 0; i < regime.random_trips; ++i) {
        const auto od = random_pair();
        writer.emit(s, od.first, od.second, spread(regime.random_speed_kmh));
      }
    }
  }
  return out;
}

}  // namespace tflow::synth

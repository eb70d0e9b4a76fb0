#include <algorithm>

#include "mdl_internal.hpp"
#include "tflow/error.hpp"

namespace tflow::mdl {

namespace {

using detail::BlockModel;

constexpr double kEps = 1e-9;
constexpr std::size_t kMaxSweeps = 1000;
constexpr std::size_t kMaxLloydIterations = 50;
// Joint splits try the top candidates of each axis only.
constexpr std::size_t kJointCandidates = 4;

// One pass over the vertices of an axis in index order. A vertex moves only
// on a strict improvement and never empties its group.
std::size_t regroup_axis(BlockModel& model, bool cols) {
  std::size_t moves = 0;
  for (std::size_t v = 0; v < model.n(); ++v) {
    const std::size_t from = model.group_of(cols, v);
    if (model.group_size(cols, from) == 1) continue;
    const auto profile = model.profile_by_group(cols, v);
    std::size_t best = from;
    double best_delta = 0.0;
    for (std::size_t g = 0; g < model.groups(cols); ++g) {
      if (g == from) continue;
      const double d = model.move_delta(cols, v, g, profile);
      if (d < best_delta - kEps) {
        best_delta = d;
        best = g;
      }
    }
    if (best != from) {
      model.move(cols, v, best, profile);
      ++moves;
    }
  }
  return moves;
}

void regroup(BlockModel& model) {
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const std::size_t moves = regroup_axis(model, false) + regroup_axis(model, true);
    if (moves == 0) return;
  }
}

// Splittable groups, most expensive per member first.
std::vector<std::size_t> split_order(const BlockModel& model, bool cols) {
  std::vector<std::size_t> groups;
  std::vector<double> per_member(model.groups(cols), 0.0);
  for (std::size_t g = 0; g < model.groups(cols); ++g) {
    if (model.group_size(cols, g) < 2) continue;
    per_member[g] = model.group_data_cost(cols, g) / static_cast<double>(model.group_size(cols, g));
    groups.push_back(g);
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [&](std::size_t a, std::size_t b) { return per_member[a] > per_member[b] + kEps; });
  return groups;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

// Members of group g to move into a new group: seeded with the member whose
// removal saves the most data bits, grown by two-means over the members'
// full-resolution densities. Empty when the members are indistinguishable.
std::vector<std::size_t> propose_split(const BlockModel& model, bool cols, std::size_t g) {
  std::vector<std::size_t> members;
  for (std::size_t v = 0; v < model.n(); ++v) {
    if (model.group_of(cols, v) == g) members.push_back(v);
  }
  if (members.size() < 2) return {};

  std::vector<std::vector<double>> density(members.size(), std::vector<double>(model.n(), 0.0));
  std::size_t seed = 0;
  double best_saving = -1.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t w = 0; w < model.n(); ++w) density[i][w] = model.entry(cols, members[i], w);
    const double saving = model.member_contribution(cols, members[i], model.profile_by_group(cols, members[i]));
    if (saving > best_saving + kEps) {
      best_saving = saving;
      seed = i;
    }
  }
  std::size_t partner = seed;
  double far = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double d = squared_distance(density[i], density[seed]);
    if (d > far + kEps) {
      far = d;
      partner = i;
    }
  }
  if (partner == seed) return {};

  std::vector<double> center_out = density[seed];
  std::vector<double> center_stay = density[partner];
  std::vector<bool> out(members.size(), false);
  for (std::size_t iter = 0; iter < kMaxLloydIterations; ++iter) {
    std::vector<bool> next(members.size(), false);
    for (std::size_t i = 0; i < members.size(); ++i) {
      next[i] = squared_distance(density[i], center_out) < squared_distance(density[i], center_stay) - kEps;
    }
    next[seed] = true;
    next[partner] = false;
    if (iter > 0 && next == out) break;
    out = next;
    std::fill(center_out.begin(), center_out.end(), 0.0);
    std::fill(center_stay.begin(), center_stay.end(), 0.0);
    std::size_t n_out = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& c = out[i] ? center_out : center_stay;
      if (out[i]) ++n_out;
      for (std::size_t w = 0; w < model.n(); ++w) c[w] += density[i][w];
    }
    const auto n_stay = members.size() - n_out;
    for (auto& x : center_out) x /= static_cast<double>(n_out);
    for (auto& x : center_stay) x /= static_cast<double>(n_stay);
  }
  std::vector<std::size_t> moved;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (out[i]) moved.push_back(members[i]);
  }
  return moved;
}

bool try_grow(BlockModel& model, bool cols) {
  const double base = model.total_cost();
  for (const auto g : split_order(model, cols)) {
    const auto moved = propose_split(model, cols, g);
    if (moved.empty()) continue;
    BlockModel trial = model;
    trial.split(cols, moved);
    regroup(trial);
    if (trial.total_cost() < base - kEps) {
      model = std::move(trial);
      return true;
    }
  }
  return false;
}

// Splits a row group and a column group together; needed when neither split
// pays off alone (e.g. block-diagonal structure seen through one group).
bool try_grow_joint(BlockModel& model) {
  const double base = model.total_cost();
  auto rows = split_order(model, false);
  auto cols = split_order(model, true);
  rows.resize(std::min(rows.size(), kJointCandidates));
  cols.resize(std::min(cols.size(), kJointCandidates));
  for (const auto g : rows) {
    const auto moved_rows = propose_split(model, false, g);
    if (moved_rows.empty()) continue;
    for (const auto h : cols) {
      const auto moved_cols = propose_split(model, true, h);
      if (moved_cols.empty()) continue;
      BlockModel trial = model;
      trial.split(false, moved_rows);
      trial.split(true, moved_cols);
      regroup(trial);
      if (trial.total_cost() < base - kEps) {
        model = std::move(trial);
        return true;
      }
    }
  }
  return false;
}

}  // namespace

Partitioning search_partitions(const SegmentCounts& counts, std::optional<Partitioning> init) {
  if (counts.size() == 0) throw ConfigError("cannot partition an empty matrix");
  const Partitioning start = init ? *init : Partitioning::trivial(counts.size());
  BlockModel model(counts, start);
  regroup(model);
  while (try_grow(model, false) || try_grow(model, true) || try_grow_joint(model)) {
  }
  return model.partitioning().canonical();
}

Partitioning search_partitions(std::span<const BinaryMatrix> matrices, std::optional<Partitioning> init) {
  if (matrices.empty()) throw ConfigError("cannot partition an empty run of matrices");
  return search_partitions(SegmentCounts(matrices), std::move(init));
}

}  // namespace tflow::mdl

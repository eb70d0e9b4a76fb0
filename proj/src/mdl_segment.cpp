#include <algorithm>
#include <limits>
#include <string>

#include "mdl_internal.hpp"
#include "tflow/error.hpp"

namespace tflow::mdl {

namespace {

constexpr double kEps = 1e-9;

SegmentModel close_segment(std::size_t first, std::size_t last, const SegmentCounts& counts,
                           const Partitioning& p, double slice_hours) {
  const auto cost = segment_cost(counts, p, slice_hours);
  return {first, last, p, cost.total_bits, cost.bits_per_hour};
}

// All set partitions of n items as restricted growth strings.
std::vector<std::vector<std::size_t>> set_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> labels(n, 0);
  auto recurse = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    for (std::size_t g = 0; g <= used && g < n; ++g) {
      labels[i] = g;
      self(self, i + 1, std::max(used, g + 1));
    }
  };
  if (n > 0) {
    labels[0] = 0;
    recurse(recurse, 1, 1);
  }
  return out;
}

std::size_t group_count(const std::vector<std::size_t>& labels) {
  std::size_t k = 0;
  for (const auto g : labels) k = std::max(k, g + 1);
  return k;
}

}  // namespace

ChangePointReport detect_change_points(std::span<const BinaryMatrix> matrices, double slice_hours) {
  if (matrices.empty()) throw ConfigError("change point detection needs at least one slice");
  if (!(slice_hours > 0.0)) throw ConfigError("slice duration must be positive");

  ChangePointReport report;
  std::size_t first = 0;
  SegmentCounts current(matrices.first(1));
  Partitioning current_p = search_partitions(current);

  for (std::size_t t = 1; t < matrices.size(); ++t) {
    SegmentCounts single(matrices.subspan(t, 1));
    SegmentCounts merged = current;
    merged.add(single);

    const Partitioning merged_p = search_partitions(merged, current_p);
    const double absorb = segment_cost(merged, merged_p, slice_hours).total_bits;
    const Partitioning single_p = search_partitions(single);
    const double split = segment_cost(current, current_p, slice_hours).total_bits +
                         segment_cost(single, single_p, slice_hours).total_bits;

    if (split < absorb - kEps) {
      report.segments.push_back(close_segment(first, t - 1, current, current_p, slice_hours));
      report.change_points.push_back(t);
      first = t;
      current = std::move(single);
      current_p = single_p;
    } else {
      current = std::move(merged);
      current_p = merged_p;
    }
  }
  current_p = search_partitions(current, current_p);
  report.segments.push_back(close_segment(first, matrices.size() - 1, current, current_p, slice_hours));
  return report;
}

ChangePointReport detect_change_points(const GraphSeries& series) {
  const auto matrices = to_matrices(series);
  return detect_change_points(matrices, series.axis.delta_t() / 3600.0);
}

Partitioning exhaustive_best_partition(const SegmentCounts& counts) {
  const std::size_t n = counts.size();
  if (n == 0) throw ConfigError("cannot partition an empty matrix");
  if (n > kOracleMaxVertices) {
    throw ConfigError("exhaustive partition search refuses n = " + std::to_string(n) + " (limit " +
                      std::to_string(kOracleMaxVertices) + ")");
  }
  if (counts.slices() == 0) throw ConfigError("cannot encode an empty run of matrices");

  const auto partitions = set_partitions(n);
  const double slices = static_cast<double>(counts.slices());
  double best = std::numeric_limits<double>::infinity();
  Partitioning best_p = Partitioning::trivial(n);

  std::vector<double> row_sums;  // k x n
  std::vector<double> block(n * n);
  for (const auto& rows : partitions) {
    const std::size_t k = group_count(rows);
    std::vector<std::size_t> row_size(k, 0);
    for (const auto g : rows) ++row_size[g];
    row_sums.assign(k * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) row_sums[rows[r] * n + c] += counts.at(r, c);
    }
    for (const auto& cols : partitions) {
      const std::size_t l = group_count(cols);
      std::vector<std::size_t> col_size(l, 0);
      for (const auto g : cols) ++col_size[g];
      std::fill(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(k * l), 0.0);
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t c = 0; c < n; ++c) block[p * l + cols[c]] += row_sums[p * n + c];
      }
      double cost = detail::partition_header_bits(n, k, l);
      for (std::size_t p = 0; p < k && cost < best; ++p) {
        for (std::size_t q = 0; q < l; ++q) {
          const double cells = slices * static_cast<double>(row_size[p] * col_size[q]);
          cost += detail::block_bits(cells, block[p * l + q]);
        }
      }
      if (cost < best - kEps) {
        best = cost;
        best_p = {rows, cols, k, l};
      }
    }
  }
  return best_p;
}

ChangePointReport brute_force_segmentation(std::span<const BinaryMatrix> matrices, double slice_hours,
                                           std::size_t max_n, std::size_t max_T) {
  if (max_n > kOracleMaxVertices || max_T > kOracleMaxSlices) {
    throw ConfigError("brute-force limits exceed the oracle caps (n <= 6, T <= 10)");
  }
  if (matrices.empty()) throw ConfigError("brute-force segmentation needs at least one slice");
  const std::size_t n = matrices.front().size();
  const std::size_t T = matrices.size();
  if (n > max_n || T > max_T) {
    throw ConfigError("brute-force segmentation refuses n = " + std::to_string(n) + ", T = " + std::to_string(T));
  }

  // seg[i][j]: best encoding of slices i..j inclusive.
  std::vector<std::vector<SegmentModel>> seg(T, std::vector<SegmentModel>(T));
  for (std::size_t i = 0; i < T; ++i) {
    SegmentCounts counts(n);
    for (std::size_t j = i; j < T; ++j) {
      counts.add(matrices[j]);
      const auto p = exhaustive_best_partition(counts);
      seg[i][j] = close_segment(i, j, counts, p, slice_hours);
    }
  }

  // best[j]: cheapest encoding of the prefix 0..j-1; prev[j]: start of its last segment.
  std::vector<double> best(T + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> prev(T + 1, 0);
  best[0] = 0.0;
  for (std::size_t j = 1; j <= T; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double cost = best[i] + seg[i][j - 1].total_cost;
      if (cost < best[j] - kEps) {
        best[j] = cost;
        prev[j] = i;
      }
    }
  }

  ChangePointReport report;
  for (std::size_t j = T; j > 0; j = prev[j]) report.segments.push_back(seg[prev[j]][j - 1]);
  std::reverse(report.segments.begin(), report.segments.end());
  for (std::size_t s = 1; s < report.segments.size(); ++s) {
    report.change_points.push_back(report.segments[s].first_slice);
  }
  return report;
}

ChangePointReport brute_force_segmentation(const GraphSeries& series, std::size_t max_n, std::size_t max_T) {
  const auto matrices = to_matrices(series);
  return brute_force_segmentation(matrices, series.axis.delta_t() / 3600.0, max_n, max_T);
}

}  // namespace tflow::mdl

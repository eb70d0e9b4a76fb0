#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tflow/flowgraph.hpp"

namespace tflow::mdl {

// Dense n x n 0/1 matrix; rows are upstream regions, columns downstream.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  explicit BinaryMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

  static BinaryMatrix from_snapshot(const GraphSnapshot& snapshot);

  std::size_t size() const { return n_; }
  bool get(std::size_t r, std::size_t c) const { return bits_[r * n_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool value = true) { bits_[r * n_ + c] = value ? 1 : 0; }
  std::size_t ones() const;

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Entry-wise sum of a run of matrices. Every cost below depends on the run
// only through these counts and the run length.
class SegmentCounts {
 public:
  SegmentCounts() = default;
  explicit SegmentCounts(std::size_t n) : n_(n), ones_(n * n, 0) {}
  explicit SegmentCounts(std::span<const BinaryMatrix> matrices);

  void add(const BinaryMatrix& m);
  void add(const SegmentCounts& other);

  std::size_t size() const { return n_; }
  std::size_t slices() const { return slices_; }
  std::uint32_t at(std::size_t r, std::size_t c) const { return ones_[r * n_ + c]; }

 private:
  std::size_t n_ = 0;
  std::size_t slices_ = 0;
  std::vector<std::uint32_t> ones_;
};

struct Partitioning {
  std::vector<std::size_t> row_group;
  std::vector<std::size_t> col_group;
  std::size_t k = 1;
  std::size_t l = 1;

  static Partitioning trivial(std::size_t n);
  // Relabels groups in order of first appearance.
  Partitioning canonical() const;

  friend bool operator==(const Partitioning&, const Partitioning&) = default;
};

// Throws ConfigError when a group is empty, a label is out of range, or the
// vertex count differs from n.
void validate(const Partitioning& p, std::size_t n);

// Universal code length for positive integers: log2 x + log2 log2 x + ...,
// positive terms only. universal_code_length(1) == 0.
double universal_code_length(std::size_t x);
double binary_entropy(double p);
double log2_binomial(std::size_t n, std::size_t k);

struct Cost {
  double header = 0.0;
  double data = 0.0;

  double total() const { return header + data; }
};

// header = L(k) + L(l) + log2 C(n-1, k-1) + log2 C(n-1, l-1)
//          + sum over blocks of ceil(log2(N + 1))
// data   = sum over blocks of N * H(ones / N)
// where N is the block's cell count over the whole run (run length x rows x
// cols) and ones its count of set entries over the run.
Cost block_encoding_cost(std::span<const BinaryMatrix> matrices, const Partitioning& p);
Cost block_encoding_cost(const SegmentCounts& counts, const Partitioning& p);

// Alternating row/column regrouping plus group splitting, starting from init
// (or a single group). Deterministic; never returns a partitioning costing
// more than the init.
Partitioning search_partitions(const SegmentCounts& counts, std::optional<Partitioning> init = std::nullopt);
Partitioning search_partitions(std::span<const BinaryMatrix> matrices,
                               std::optional<Partitioning> init = std::nullopt);

struct SegmentCost {
  double total_bits = 0.0;
  double bits_per_hour = 0.0;
};

// block_encoding_cost plus the universal code of the run length.
SegmentCost segment_cost(const SegmentCounts& counts, const Partitioning& p, double slice_hours);
SegmentCost segment_cost(std::span<const BinaryMatrix> matrices, const Partitioning& p, double slice_hours);

struct SegmentModel {
  std::size_t first_slice = 0;
  std::size_t last_slice = 0;
  Partitioning partitioning;
  double total_cost = 0.0;
  double cost_per_hour = 0.0;
};

struct ChangePointReport {
  std::vector<std::size_t> change_points;  // first slice of every segment after the first
  std::vector<SegmentModel> segments;

  double total_cost() const;
};

// Streaming segmentation: each new slice is either absorbed into the current
// segment or starts a new one, whichever encodes cheaper (absorb on ties).
ChangePointReport detect_change_points(std::span<const BinaryMatrix> matrices, double slice_hours);
ChangePointReport detect_change_points(const GraphSeries& series);

inline constexpr std::size_t kOracleMaxVertices = 6;
inline constexpr std::size_t kOracleMaxSlices = 10;

// Exact minimum-cost partitioning by enumerating all row and column set
// partitions. Refuses n > kOracleMaxVertices.
Partitioning exhaustive_best_partition(const SegmentCounts& counts);

// Exact minimum-cost segmentation (dynamic programming over boundaries, with
// exhaustive partitioning per segment). Desk-scale oracle only.
ChangePointReport brute_force_segmentation(std::span<const BinaryMatrix> matrices, double slice_hours,
                                           std::size_t max_n = kOracleMaxVertices,
                                           std::size_t max_T = kOracleMaxSlices);
ChangePointReport brute_force_segmentation(const GraphSeries& series, std::size_t max_n = kOracleMaxVertices,
                                           std::size_t max_T = kOracleMaxSlices);

std::vector<BinaryMatrix> to_matrices(const GraphSeries& series);

// Text grid of the run's entries reordered by group: '#' set in every slice,
// '+' in some, '.' in none; '|' and '-' separate groups.
void write_partitioned_matrix(std::ostream& out, const SegmentCounts& counts, const Partitioning& p);

}  // namespace tflow::mdl

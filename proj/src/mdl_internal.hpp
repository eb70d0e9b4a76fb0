#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tflow/mdl.hpp"

namespace tflow::mdl::detail {

// Header plus data bits of one block with `cells` entries, `ones` of them set.
inline double block_bits(double cells, double ones) {
  return std::ceil(std::log2(cells + 1.0)) + cells * binary_entropy(ones / cells);
}

// Bits for the group counts and group-size choices of a partitioning.
inline double partition_header_bits(std::size_t n, std::size_t k, std::size_t l) {
  return universal_code_length(k) + universal_code_length(l) + log2_binomial(n - 1, k - 1) +
         log2_binomial(n - 1, l - 1);
}

// Co-clustering state over fixed segment counts: group labels, group sizes and
// per-block ones totals. Moves update the totals incrementally.
class BlockModel {
 public:
  BlockModel(const SegmentCounts& counts, const Partitioning& p);

  std::size_t n() const { return counts_->size(); }
  std::size_t groups(bool cols) const { return cols ? l_ : k_; }
  std::size_t group_of(bool cols, std::size_t v) const { return cols ? col_of_[v] : row_of_[v]; }
  std::size_t group_size(bool cols, std::size_t g) const { return cols ? col_size_[g] : row_size_[g]; }
  // Count at (v, w) with v on the `cols` axis: counts(w, v) for columns, counts(v, w) for rows.
  std::uint32_t entry(bool cols, std::size_t v, std::size_t w) const {
    return cols ? counts_->at(w, v) : counts_->at(v, w);
  }

  double block_cost(std::size_t p, std::size_t q) const;
  double total_cost() const;
  double data_cost() const;
  // Data bits of the blocks in row group g (or column group g).
  double group_data_cost(bool cols, std::size_t g) const;

  // Ones of vertex v (on the given axis) falling in each group of the other axis.
  std::vector<double> profile_by_group(bool cols, std::size_t v) const;

  // Data bits saved in v's group blocks if v were removed from it.
  double member_contribution(bool cols, std::size_t v, const std::vector<double>& profile) const;

  // Cost change of moving v into group `to`, given its profile_by_group.
  double move_delta(bool cols, std::size_t v, std::size_t to, const std::vector<double>& profile) const;
  void move(bool cols, std::size_t v, std::size_t to, const std::vector<double>& profile);

  // Moves the listed vertices into a new group on the given axis.
  void split(bool cols, const std::vector<std::size_t>& members);

  Partitioning partitioning() const;

 private:
  void rebuild();
  double& ones_at(std::size_t p, std::size_t q) { return ones_[p * l_ + q]; }
  double ones_at(std::size_t p, std::size_t q) const { return ones_[p * l_ + q]; }

  const SegmentCounts* counts_;
  std::size_t k_;
  std::size_t l_;
  std::vector<std::size_t> row_of_;
  std::vector<std::size_t> col_of_;
  std::vector<std::size_t> row_size_;
  std::vector<std::size_t> col_size_;
  std::vector<double> ones_;
};

}  // namespace tflow::mdl::detail

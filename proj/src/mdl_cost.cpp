#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mdl_internal.hpp"
#include "tflow/error.hpp"

namespace tflow::mdl {

BinaryMatrix BinaryMatrix::from_snapshot(const GraphSnapshot& snapshot) {
  BinaryMatrix m(snapshot.vertex_count);
  for (const auto& [i, j] : snapshot.edges) m.set(i, j);
  return m;
}

std::size_t BinaryMatrix::ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

SegmentCounts::SegmentCounts(std::span<const BinaryMatrix> matrices)
    : n_(matrices.empty() ? 0 : matrices.front().size()), ones_(n_ * n_, 0) {
  for (const auto& m : matrices) add(m);
}

void SegmentCounts::add(const BinaryMatrix& m) {
  if (slices_ == 0 && ones_.empty()) {
    n_ = m.size();
    ones_.assign(n_ * n_, 0);
  }
  if (m.size() != n_) throw ConfigError("matrix size differs from the segment's vertex count");
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) ones_[r * n_ + c] += m.get(r, c) ? 1u : 0u;
  }
  ++slices_;
}

void SegmentCounts::add(const SegmentCounts& other) {
  if (other.n_ != n_) throw ConfigError("segment counts differ in vertex count");
  for (std::size_t i = 0; i < ones_.size(); ++i) ones_[i] += other.ones_[i];
  slices_ += other.slices_;
}

Partitioning Partitioning::trivial(std::size_t n) {
  return {std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0), 1, 1};
}

Partitioning Partitioning::canonical() const {
  auto relabel = [](const std::vector<std::size_t>& groups, std::size_t count) {
    std::vector<std::size_t> map(count, count);
    std::vector<std::size_t> out(groups.size());
    std::size_t next = 0;
    for (std::size_t v = 0; v < groups.size(); ++v) {
      if (map[groups[v]] == count) map[groups[v]] = next++;
      out[v] = map[groups[v]];
    }
    return out;
  };
  return {relabel(row_group, k), relabel(col_group, l), k, l};
}

void validate(const Partitioning& p, std::size_t n) {
  auto check = [n](const std::vector<std::size_t>& groups, std::size_t count, const char* axis) {
    if (groups.size() != n) {
      throw ConfigError(std::string("partitioning ") + axis + " labels cover " + std::to_string(groups.size()) +
                        " vertices, expected " + std::to_string(n));
    }
    if (count == 0) throw ConfigError(std::string("partitioning has zero ") + axis + " groups");
    std::vector<bool> seen(count, false);
    for (const auto g : groups) {
      if (g >= count) throw ConfigError(std::string("partitioning ") + axis + " label out of range");
      seen[g] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw ConfigError(std::string("partitioning has an empty ") + axis + " group");
    }
  };
  check(p.row_group, p.k, "row");
  check(p.col_group, p.l, "column");
}

double universal_code_length(std::size_t x) {
  if (x == 0) throw ConfigError("universal code is defined for positive integers only");
  double total = 0.0;
  double term = std::log2(static_cast<double>(x));
  while (term > 0.0) {
    total += term;
    term = std::log2(term);
  }
  return total;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double log2_binomial(std::size_t n, std::size_t k) {
  if (k > n) throw ConfigError("binomial coefficient with k > n");
  k = std::min(k, n - k);
  double total = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    total += std::log2(static_cast<double>(n - k + i)) - std::log2(static_cast<double>(i));
  }
  return total;
}

namespace detail {

BlockModel::BlockModel(const SegmentCounts& counts, const Partitioning& p)
    : counts_(&counts), k_(p.k), l_(p.l), row_of_(p.row_group), col_of_(p.col_group) {
  validate(p, counts.size());
  if (counts.slices() == 0) throw ConfigError("cannot encode an empty run of matrices");
  rebuild();
}

void BlockModel::rebuild() {
  row_size_.assign(k_, 0);
  col_size_.assign(l_, 0);
  ones_.assign(k_ * l_, 0.0);
  for (const auto g : row_of_) ++row_size_[g];
  for (const auto g : col_of_) ++col_size_[g];
  const std::size_t size = n();
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) ones_at(row_of_[r], col_of_[c]) += counts_->at(r, c);
  }
}

double BlockModel::block_cost(std::size_t p, std::size_t q) const {
  const double cells = static_cast<double>(counts_->slices() * row_size_[p] * col_size_[q]);
  return block_bits(cells, ones_at(p, q));
}

double BlockModel::data_cost() const {
  double total = 0.0;
  for (std::size_t p = 0; p < k_; ++p) {
    for (std::size_t q = 0; q < l_; ++q) {
      const double cells = static_cast<double>(counts_->slices() * row_size_[p] * col_size_[q]);
      total += cells * binary_entropy(ones_at(p, q) / cells);
    }
  }
  return total;
}

double BlockModel::total_cost() const {
  double total = partition_header_bits(n(), k_, l_);
  for (std::size_t p = 0; p < k_; ++p) {
    for (std::size_t q = 0; q < l_; ++q) total += block_cost(p, q);
  }
  return total;
}

double BlockModel::group_data_cost(bool cols, std::size_t g) const {
  double total = 0.0;
  const std::size_t other = cols ? k_ : l_;
  for (std::size_t h = 0; h < other; ++h) {
    const std::size_t p = cols ? h : g;
    const std::size_t q = cols ? g : h;
    const double cells = static_cast<double>(counts_->slices() * row_size_[p] * col_size_[q]);
    total += cells * binary_entropy(ones_at(p, q) / cells);
  }
  return total;
}

std::vector<double> BlockModel::profile_by_group(bool cols, std::size_t v) const {
  std::vector<double> out(cols ? k_ : l_, 0.0);
  const auto& other_of = cols ? row_of_ : col_of_;
  for (std::size_t w = 0; w < n(); ++w) out[other_of[w]] += entry(cols, v, w);
  return out;
}

double BlockModel::member_contribution(bool cols, std::size_t v, const std::vector<double>& profile) const {
  const std::size_t g = group_of(cols, v);
  const auto& sizes = cols ? col_size_ : row_size_;
  const auto& other_sizes = cols ? row_size_ : col_size_;
  const double slices = static_cast<double>(counts_->slices());
  double saved = 0.0;
  for (std::size_t h = 0; h < other_sizes.size(); ++h) {
    const double ones = cols ? ones_at(h, g) : ones_at(g, h);
    const double unit = slices * static_cast<double>(other_sizes[h]);
    const double cells = unit * static_cast<double>(sizes[g]);
    saved += cells * binary_entropy(ones / cells);
    if (sizes[g] > 1) {
      saved -= (cells - unit) * binary_entropy((ones - profile[h]) / (cells - unit));
    }
  }
  return saved;
}

double BlockModel::move_delta(bool cols, std::size_t v, std::size_t to, const std::vector<double>& profile) const {
  const std::size_t from = group_of(cols, v);
  if (from == to) return 0.0;
  const auto& sizes = cols ? col_size_ : row_size_;
  const auto& other_sizes = cols ? row_size_ : col_size_;
  const double slices = static_cast<double>(counts_->slices());
  double delta = 0.0;
  for (std::size_t h = 0; h < other_sizes.size(); ++h) {
    const double ones_from = cols ? ones_at(h, from) : ones_at(from, h);
    const double ones_to = cols ? ones_at(h, to) : ones_at(to, h);
    const double unit = slices * static_cast<double>(other_sizes[h]);
    const double cells_from = unit * static_cast<double>(sizes[from]);
    const double cells_to = unit * static_cast<double>(sizes[to]);
    const double before = block_bits(cells_from, ones_from) + block_bits(cells_to, ones_to);
    double after = block_bits(cells_to + unit, ones_to + profile[h]);
    if (sizes[from] > 1) after += block_bits(cells_from - unit, ones_from - profile[h]);
    delta += after - before;
  }
  return delta;
}

void BlockModel::move(bool cols, std::size_t v, std::size_t to, const std::vector<double>& profile) {
  auto& of = cols ? col_of_ : row_of_;
  auto& sizes = cols ? col_size_ : row_size_;
  const std::size_t from = of[v];
  if (from == to) return;
  for (std::size_t h = 0; h < profile.size(); ++h) {
    if (cols) {
      ones_at(h, from) -= profile[h];
      ones_at(h, to) += profile[h];
    } else {
      ones_at(from, h) -= profile[h];
      ones_at(to, h) += profile[h];
    }
  }
  --sizes[from];
  ++sizes[to];
  of[v] = to;
}

void BlockModel::split(bool cols, const std::vector<std::size_t>& members) {
  auto& of = cols ? col_of_ : row_of_;
  auto& count = cols ? l_ : k_;
  const std::size_t fresh = count++;
  for (const auto v : members) of[v] = fresh;
  rebuild();
}

Partitioning BlockModel::partitioning() const { return {row_of_, col_of_, k_, l_}; }

}  // namespace detail

Cost block_encoding_cost(const SegmentCounts& counts, const Partitioning& p) {
  const detail::BlockModel model(counts, p);
  Cost cost;
  cost.data = model.data_cost();
  double header = detail::partition_header_bits(counts.size(), p.k, p.l);
  const double slices = static_cast<double>(counts.slices());
  std::vector<std::size_t> rs(p.k, 0), cs(p.l, 0);
  for (const auto g : p.row_group) ++rs[g];
  for (const auto g : p.col_group) ++cs[g];
  for (std::size_t a = 0; a < p.k; ++a) {
    for (std::size_t b = 0; b < p.l; ++b) {
      header += std::ceil(std::log2(slices * static_cast<double>(rs[a] * cs[b]) + 1.0));
    }
  }
  cost.header = header;
  return cost;
}

Cost block_encoding_cost(std::span<const BinaryMatrix> matrices, const Partitioning& p) {
  if (matrices.empty()) throw ConfigError("cannot encode an empty run of matrices");
  return block_encoding_cost(SegmentCounts(matrices), p);
}

SegmentCost segment_cost(const SegmentCounts& counts, const Partitioning& p, double slice_hours) {
  if (!(slice_hours > 0.0)) throw ConfigError("slice duration must be positive");
  SegmentCost out;
  out.total_bits = block_encoding_cost(counts, p).total() + universal_code_length(counts.slices());
  out.bits_per_hour = out.total_bits / (slice_hours * static_cast<double>(counts.slices()));
  return out;
}

SegmentCost segment_cost(std::span<const BinaryMatrix> matrices, const Partitioning& p, double slice_hours) {
  if (matrices.empty()) throw ConfigError("cannot encode an empty run of matrices");
  return segment_cost(SegmentCounts(matrices), p, slice_hours);
}

double ChangePointReport::total_cost() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.total_cost;
  return total;
}

std::vector<BinaryMatrix> to_matrices(const GraphSeries& series) {
  std::vector<BinaryMatrix> out;
  out.reserve(series.snapshots.size());
  for (const auto& s : series.snapshots) out.push_back(BinaryMatrix::from_snapshot(s));
  return out;
}

void write_partitioned_matrix(std::ostream& out, const SegmentCounts& counts, const Partitioning& p) {
  validate(p, counts.size());
  const std::size_t n = counts.size();
  auto order = [n](const std::vector<std::size_t>& groups) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return groups[a] < groups[b]; });
    return idx;
  };
  const auto rows = order(p.row_group);
  const auto cols = order(p.col_group);
  const std::size_t width = std::to_string(n == 0 ? 0 : n - 1).size();

  auto header_line = [&] {
    out << std::string(width + 1, ' ');
    for (std::size_t ci = 0; ci < n; ++ci) {
      if (ci > 0 && p.col_group[cols[ci]] != p.col_group[cols[ci - 1]]) out << '|';
      out << (cols[ci] % 10);
    }
    out << '\n';
  };
  auto rule = [&] {
    out << std::string(width + 1, ' ');
    for (std::size_t ci = 0; ci < n; ++ci) {
      if (ci > 0 && p.col_group[cols[ci]] != p.col_group[cols[ci - 1]]) out << '+';
      out << '-';
    }
    out << '\n';
  };

  out << "# rows: " << p.k << " groups, cols: " << p.l << " groups, slices: " << counts.slices() << '\n';
  header_line();
  for (std::size_t ri = 0; ri < n; ++ri) {
    if (ri > 0 && p.row_group[rows[ri]] != p.row_group[rows[ri - 1]]) rule();
    const std::string label = std::to_string(rows[ri]);
    out << std::string(width - label.size(), ' ') << label << ' ';
    for (std::size_t ci = 0; ci < n; ++ci) {
      if (ci > 0 && p.col_group[cols[ci]] != p.col_group[cols[ci - 1]]) out << '|';
      const auto v = counts.at(rows[ri], cols[ci]);
      out << (v == 0 ? '.' : (v == counts.slices() ? '#' : '+'));
    }
    out << '\n';
  }
}

}  // namespace tflow::mdl

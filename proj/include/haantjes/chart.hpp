#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "haantjes/error.hpp"

namespace haantjes {

/// Canonical chart (q^1..q^n, p_1..p_n) with the q-indices grouped into
/// consecutive blocks sigma_1..sigma_v. Block a owns the conjugate pairs
/// (q^k, p_k) for k in block_range(a).
///
/// Variables are addressed by their position in the ordering q-block then
/// p-block, so index k < n is q^{k+1} and index n + k is p_{k+1}.
class Chart {
 public:
  /// `names` may be empty (defaults to q1..qn, p1..pn) or hold 2n entries.
  explicit Chart(std::vector<int> blocks, std::vector<std::string> names = {});

  /// Single block of size n.
  static Chart flat(int n, std::vector<std::string> names = {});

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const std::vector<int>& blocks() const { return blocks_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int index) const { return names_.at(index); }

  int q_index(int k) const { return k; }
  int p_index(int k) const { return n_ + k; }
  bool is_momentum(int index) const { return index >= n_; }
  /// Configuration index k of a variable (strips the p offset).
  int pair_of(int index) const { return index % n_; }

  /// Half-open range [begin, end) of configuration indices in block a.
  std::pair<int, int> block_range(int a) const;
  int block_of(int index) const;

  /// Resolves a declared name or a block alias (q<a>_<j>, p<a>_<j>, 1-based).
  std::optional<int> find(std::string_view name) const;

  /// Same chart with a different block partition.
  Chart with_blocks(std::vector<int> blocks) const;

  bool operator==(const Chart& other) const {
    return blocks_ == other.blocks_ && names_ == other.names_;
  }

 private:
  int n_ = 0;
  std::vector<int> blocks_;
  std::vector<int> offsets_;
  std::vector<std::string> names_;
};

using ChartPtr = std::shared_ptr<const Chart>;

inline ChartPtr make_chart(std::vector<int> blocks, std::vector<std::string> names = {}) {
  return std::make_shared<const Chart>(std::move(blocks), std::move(names));
}

/// A phase-space point in a given chart.
class Point {
 public:
  Point(ChartPtr chart, std::vector<double> coords);

  const ChartPtr& chart() const { return chart_; }
  std::span<const double> coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }
  int dim() const { return static_cast<int>(coords_.size()); }

 private:
  ChartPtr chart_;
  std::vector<double> coords_;
};

}  // namespace haantjes

#include "haantjes/chart.hpp"

#include <charconv>
#include <numeric>

namespace haantjes {

Chart::Chart(std::vector<int> blocks, std::vector<std::string> names)
    : blocks_(std::move(blocks)), names_(std::move(names)) {
  if (blocks_.empty()) throw ShapeError("chart needs at least one block");
  int offset = 0;
  for (int size : blocks_) {
    if (size <= 0) throw ShapeError("block sizes must be positive");
    offsets_.push_back(offset);
    offset += size;
  }
  n_ = offset;
  if (names_.empty()) {
    for (int k = 0; k < n_; ++k) names_.push_back("q" + std::to_string(k + 1));
    for (int k = 0; k < n_; ++k) names_.push_back("p" + std::to_string(k + 1));
  }
  if (static_cast<int>(names_.size()) != 2 * n_)
    throw ShapeError("chart declares " + std::to_string(names_.size()) + " names, expected " +
                     std::to_string(2 * n_));
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j]) throw ShapeError("duplicate variable name '" + names_[i] + "'");
}

Chart Chart::flat(int n, std::vector<std::string> names) {
  return Chart(std::vector<int>{n}, std::move(names));
}

std::pair<int, int> Chart::block_range(int a) const {
  if (a < 0 || a >= block_count())
    throw ShapeError("block index " + std::to_string(a + 1) + " out of range (chart has " +
                     std::to_string(block_count()) + " blocks)");
  return {offsets_[a], offsets_[a] + blocks_[a]};
}

int Chart::block_of(int index) const {
  const int k = pair_of(index);
  for (int a = block_count() - 1; a >= 0; --a)
    if (k >= offsets_[a]) return a;
  return 0;
}

std::optional<int> Chart::find(std::string_view name) const {
  for (int i = 0; i < dim(); ++i)
    if (names_[i] == name) return i;
  // q<a>_<j> / p<a>_<j>
  if (name.size() < 4 || (name[0] != 'q' && name[0] != 'p')) return std::nullopt;
  const auto underscore = name.find('_');
  if (underscore == std::string_view::npos) return std::nullopt;
  int a = 0, j = 0;
  const char* first = name.data() + 1;
  const char* mid = name.data() + underscore;
  const char* last = name.data() + name.size();
  auto r1 = std::from_chars(first, mid, a);
  auto r2 = std::from_chars(mid + 1, last, j);
  if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != last)
    return std::nullopt;
  if (a < 1 || a > block_count() || j < 1 || j > blocks_[a - 1]) return std::nullopt;
  const int k = offsets_[a - 1] + j - 1;
  return name[0] == 'q' ? q_index(k) : p_index(k);
}

Chart Chart::with_blocks(std::vector<int> blocks) const { return Chart(std::move(blocks), names_); }

Point::Point(ChartPtr chart, std::vector<double> coords)
    : chart_(std::move(chart)), coords_(std::move(coords)) {
  if (!chart_) throw ShapeError("point without chart");
  if (static_cast<int>(coords_.size()) != chart_->dim())
    throw ShapeError("point has " + std::to_string(coords_.size()) + " coordinates, chart needs " +
                     std::to_string(chart_->dim()));
}

}  // namespace haantjes

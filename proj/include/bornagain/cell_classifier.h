#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bornagain/forest.h"

namespace bornagain {

// Ensemble compiled against a split universe for fast, float-free cell
// classification. Every internal node stores the integer level of its
// threshold, so the test "x_j <= H_j[l]" becomes "z_j <= l". When the
// universe has few enough cells, all classes are precomputed into a dense
// table indexed in mixed radix (feature 0 varies fastest).
class CellClassifier {
 public:
  static constexpr std::uint64_t kDefaultTableCap = std::uint64_t{1} << 25;

  CellClassifier(const Ensemble& ensemble, const SplitUniverse& universe,
                 std::uint64_t table_cap = kDefaultTableCap);

  // `z` holds 1-based cell indices of `universe()`.
  int classify(std::span<const int> z) const {
    if (!table_.empty()) return table_[cell_index(z)];
    return classify_by_walk(z);
  }
  int classify_by_walk(std::span<const int> z) const;

  bool has_table() const { return !table_.empty(); }
  std::span<const std::uint8_t> table() const { return table_; }
  std::span<const std::uint64_t> strides() const { return strides_; }

  std::uint64_t cell_index(std::span<const int> z) const {
    std::uint64_t index = 0;
    for (size_t j = 0; j < z.size(); ++j)
      index += static_cast<std::uint64_t>(z[j] - 1) * strides_[j];
    return index;
  }

  const SplitUniverse& universe() const { return universe_; }
  int num_features() const { return universe_.num_features(); }
  int num_classes() const { return num_classes_; }

 private:
  struct FlatNode {
    std::int32_t feature;  // -1 for leaves
    std::int32_t value;    // base level for splits, class for leaves
    std::int32_t le;
    std::int32_t gt;
  };

  SplitUniverse universe_;
  int num_classes_ = 0;
  std::vector<FlatNode> nodes_;
  std::vector<std::int32_t> roots_;
  std::vector<std::int64_t> weights_;
  // Per feature, cell index here -> cell index in the unfiltered universe.
  std::vector<std::vector<std::int32_t>> base_cell_;
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint8_t> table_;
};

// Calls `visit(z)` for every cell of `region` in mixed-radix order (feature 0
// fastest). `visit` returns false to stop early. Returns the number of cells
// visited.
template <typename Visitor>
std::uint64_t for_each_cell(const Region& region, Visitor&& visit) {
  std::vector<int> z = region.lo.z;
  const size_t p = z.size();
  std::uint64_t visited = 0;
  while (true) {
    ++visited;
    if (!visit(std::span<const int>(z))) return visited;
    size_t j = 0;
    while (j < p && z[j] == region.hi.z[j]) {
      z[j] = region.lo.z[j];
      ++j;
    }
    if (j == p) return visited;
    ++z[j];
  }
}

}  // namespace bornagain

#include "bornagain/cell_classifier.h"

#include <array>

#include "bornagain/error.h"

namespace bornagain {

CellClassifier::CellClassifier(const Ensemble& ensemble, const SplitUniverse& universe,
                               std::uint64_t table_cap)
    : universe_(universe), num_classes_(ensemble.num_classes()) {
  if (universe.num_features() != ensemble.num_features())
    throw InputError("universe and ensemble disagree on the number of features");

  const auto vote_weights = ensemble.vote_weights();
  weights_.assign(vote_weights.begin(), vote_weights.end());
  for (const Tree& tree : ensemble.trees()) {
    const auto offset = static_cast<std::int32_t>(nodes_.size());
    roots_.push_back(offset + tree.root());
    for (const Node& nd : tree.nodes()) {
      if (nd.is_leaf()) {
        nodes_.push_back({-1, nd.leaf_class, -1, -1});
      } else {
        nodes_.push_back({nd.feature, universe.base_level_of(nd.feature, nd.threshold),
                          offset + nd.le, offset + nd.gt});
      }
    }
  }

  const int p = universe.num_features();
  base_cell_.resize(static_cast<size_t>(p));
  strides_.resize(static_cast<size_t>(p));
  std::uint64_t stride = 1;
  bool stride_overflow = false;
  for (int j = 0; j < p; ++j) {
    auto& map = base_cell_[static_cast<size_t>(j)];
    map.resize(static_cast<size_t>(universe.num_cells(j)) + 1);
    for (int z = 1; z <= universe.num_cells(j); ++z)
      map[static_cast<size_t>(z)] = universe.base_cell(j, z);
    strides_[static_cast<size_t>(j)] = stride;
    const auto c = static_cast<std::uint64_t>(universe.num_cells(j));
    if (stride > UINT64_MAX / c) stride_overflow = true;
    stride = stride_overflow ? stride : stride * c;
  }

  const auto cells = universe.cell_count();
  if (!stride_overflow && cells && *cells <= table_cap && num_classes_ <= 255) {
    table_.resize(*cells);
    const Region all = full_region(universe);
    std::uint64_t index = 0;
    // for_each_cell walks in the same mixed-radix order as cell_index().
    for_each_cell(all, [&](std::span<const int> z) {
      table_[index++] = static_cast<std::uint8_t>(classify_by_walk(z));
      return true;
    });
  }
}

int CellClassifier::classify_by_walk(std::span<const int> z) const {
  constexpr size_t kInline = 16;
  std::array<std::int64_t, kInline> inline_votes{};
  std::vector<std::int64_t> heap_votes;
  std::span<std::int64_t> votes;
  if (static_cast<size_t>(num_classes_) <= kInline) {
    votes = std::span<std::int64_t>(inline_votes.data(), static_cast<size_t>(num_classes_));
  } else {
    heap_votes.assign(static_cast<size_t>(num_classes_), 0);
    votes = heap_votes;
  }
  for (size_t t = 0; t < roots_.size(); ++t) {
    const FlatNode* nd = &nodes_[static_cast<size_t>(roots_[t])];
    while (nd->feature >= 0) {
      const auto f = static_cast<size_t>(nd->feature);
      const int zj = base_cell_[f][static_cast<size_t>(z[f])];
      nd = &nodes_[static_cast<size_t>(zj <= nd->value ? nd->le : nd->gt)];
    }
    votes[static_cast<size_t>(nd->value)] += weights_[t];
  }
  return weighted_majority(votes);
}

}  // namespace bornagain

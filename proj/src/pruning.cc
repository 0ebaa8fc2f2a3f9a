#include "bornagain/pruning.h"

#include <string>

#include "bornagain/error.h"

namespace bornagain {
namespace {

int leftmost_class(const Tree& tree, int node) {
  while (!tree.node(node).is_leaf()) node = tree.node(node).le;
  return tree.node(node).leaf_class;
}

class Pruner {
 public:
  Pruner(const Tree& tree, std::vector<std::uint64_t> counts)
      : tree_(tree), counts_(std::move(counts)) {}

  int prune(int node) {
    const Node& nd = tree_.node(node);
    if (nd.is_leaf()) return builder_.add_leaf(nd.leaf_class);
    const std::uint64_t left = counts_[static_cast<size_t>(nd.le)];
    const std::uint64_t right = counts_[static_cast<size_t>(nd.gt)];
    if (left == 0 && right == 0) return builder_.add_leaf(leftmost_class(tree_, node));
    if (right == 0) return prune(nd.le);
    if (left == 0) return prune(nd.gt);
    const int slot = builder_.reserve();
    const int le = prune(nd.le);
    const int gt = prune(nd.gt);
    builder_.set_split(slot, nd.feature, nd.threshold, le, gt);
    return slot;
  }

  BornAgainTree finish() && { return std::move(builder_).finish(); }

 private:
  const Tree& tree_;
  std::vector<std::uint64_t> counts_;
  TreeBuilder builder_;
};

}  // namespace

std::vector<std::uint64_t> route_samples(const BornAgainTree& tree, const SampleSet& samples) {
  const Tree& t = tree.tree();
  for (const Node& nd : t.nodes())
    if (!nd.is_leaf() && nd.feature >= samples.num_features())
      throw InputError("samples have " + std::to_string(samples.num_features()) +
                       " features but the tree splits on feature " + std::to_string(nd.feature));
  std::vector<std::uint64_t> counts(t.nodes().size(), 0);
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto x = samples.row(i);
    int node = t.root();
    while (true) {
      ++counts[static_cast<size_t>(node)];
      const Node& nd = t.node(node);
      if (nd.is_leaf()) break;
      node = x[static_cast<size_t>(nd.feature)] <= nd.threshold ? nd.le : nd.gt;
    }
  }
  return counts;
}

// Top-down replacement gives the same tree as the bottom-up pass: the
// occupancy of a node's children does not depend on what is pruned beneath
// them, so every split sees the same test either way.
BornAgainTree post_prune(const BornAgainTree& tree, const SampleSet& samples) {
  Pruner pruner(tree.tree(), route_samples(tree, samples));
  const std::uint64_t at_root = samples.size();
  if (at_root == 0) {
    TreeBuilder builder;
    builder.add_leaf(leftmost_class(tree.tree(), tree.tree().root()));
    return std::move(builder).finish();
  }
  pruner.prune(tree.tree().root());
  return std::move(pruner).finish();
}

}  // namespace bornagain

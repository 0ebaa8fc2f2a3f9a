#pragma once

#include <span>

#include "bornagain/forest.h"

namespace bornagain {

// Single decision tree produced by the solver, the heuristic or pruning.
// Splits are stored by threshold; the level a split tests is recovered from
// whichever universe the tree is evaluated against.
class BornAgainTree {
 public:
  explicit BornAgainTree(Tree tree) : tree_(std::move(tree)) {}

  const Tree& tree() const { return tree_; }
  int depth() const { return tree_.depth(); }
  int num_leaves() const { return tree_.num_leaves(); }
  int num_splits() const { return tree_.num_leaves() - 1; }

  int class_of_sample(std::span<const double> x) const { return tree_.class_of_sample(x); }
  // `z` is a cell of `universe`; every split threshold must be one of its
  // levels (InconsistencyError otherwise).
  int class_of_cell(std::span<const int> z, const SplitUniverse& universe) const;

  friend bool operator==(const BornAgainTree&, const BornAgainTree&) = default;

 private:
  Tree tree_;
};

// Appends nodes in DFS pre-order: reserve a slot for a split, build both
// children, then fill the slot.
class TreeBuilder {
 public:
  int add_leaf(int k) {
    nodes_.push_back(Node::leaf(k));
    return static_cast<int>(nodes_.size()) - 1;
  }
  int reserve() {
    nodes_.push_back(Node::leaf(0));
    return static_cast<int>(nodes_.size()) - 1;
  }
  void set_split(int slot, int feature, double threshold, int le, int gt) {
    nodes_[static_cast<size_t>(slot)] = Node::split(feature, threshold, le, gt);
  }
  BornAgainTree finish(int root = 0) && { return BornAgainTree(Tree(std::move(nodes_), root)); }

 private:
  std::vector<Node> nodes_;
};

}  // namespace bornagain

#include "bornagain/forest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bornagain/cell_classifier.h"
#include "bornagain/error.h"

namespace bornagain {
namespace {

std::string at_node(int i) { return " (node " + std::to_string(i) + ")"; }

// Integer vote weights: smallest decimal scale (up to 1e-9) that makes every
// weight integral, then divided by the common gcd.
std::vector<std::int64_t> scale_weights(std::span<const double> weights) {
  std::vector<std::int64_t> scaled(weights.size());
  for (int digits = 0; digits <= 9; ++digits) {
    const double scale = std::pow(10.0, digits);
    bool exact = true;
    for (size_t t = 0; t < weights.size() && exact; ++t) {
      const double v = weights[t] * scale;
      const double r = std::round(v);
      exact = std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v));
      scaled[t] = static_cast<std::int64_t>(r);
    }
    if (exact || digits == 9) break;
  }
  std::int64_t g = 0;
  for (auto w : scaled) g = std::gcd(g, w);
  if (g > 1)
    for (auto& w : scaled) w /= g;
  return scaled;
}

}  // namespace

// ---------------------------------------------------------------- Tree

Tree::Tree(std::vector<Node> nodes, int root) : nodes_(std::move(nodes)), root_(root) {
  const int n = static_cast<int>(nodes_.size());
  if (n == 0) throw InputError("tree has no nodes");
  if (root_ < 0 || root_ >= n) throw InputError("tree root index out of range");

  std::vector<char> seen(nodes_.size(), 0);
  // (node, depth) pairs; explicit stack so deep trees cannot overflow.
  std::vector<std::pair<int, int>> stack{{root_, 0}};
  int visited = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    if (i < 0 || i >= n) throw InputError("child index out of range" + at_node(i));
    if (seen[static_cast<size_t>(i)]) throw InputError("node reached twice" + at_node(i));
    seen[static_cast<size_t>(i)] = 1;
    ++visited;
    const Node& nd = nodes_[static_cast<size_t>(i)];
    depth_ = std::max(depth_, d);
    if (nd.is_leaf()) {
      if (nd.leaf_class < 0) throw InputError("leaf without class" + at_node(i));
      ++leaves_;
      continue;
    }
    if (!std::isfinite(nd.threshold)) throw InputError("non-finite threshold" + at_node(i));
    stack.emplace_back(nd.le, d + 1);
    stack.emplace_back(nd.gt, d + 1);
  }
  if (visited != n) throw InputError("tree contains unreachable nodes");
}

Tree Tree::constant(int k) { return Tree({Node::leaf(k)}); }

Tree Tree::stump(int feature, double threshold, int le_class, int gt_class) {
  return Tree({Node::split(feature, threshold, 1, 2), Node::leaf(le_class), Node::leaf(gt_class)});
}

int Tree::class_of_sample(std::span<const double> x) const {
  const Node* nd = &nodes_[static_cast<size_t>(root_)];
  while (!nd->is_leaf()) {
    const int next = x[static_cast<size_t>(nd->feature)] <= nd->threshold ? nd->le : nd->gt;
    nd = &nodes_[static_cast<size_t>(next)];
  }
  return nd->leaf_class;
}

bool operator==(const Tree& a, const Tree& b) {
  // Structural comparison, independent of node storage order.
  std::vector<std::pair<int, int>> stack{{a.root_, b.root_}};
  while (!stack.empty()) {
    auto [i, k] = stack.back();
    stack.pop_back();
    const Node& x = a.node(i);
    const Node& y = b.node(k);
    if (x.is_leaf() != y.is_leaf()) return false;
    if (x.is_leaf()) {
      if (x.leaf_class != y.leaf_class) return false;
      continue;
    }
    if (x.feature != y.feature || x.threshold != y.threshold) return false;
    stack.emplace_back(x.le, y.le);
    stack.emplace_back(x.gt, y.gt);
  }
  return true;
}

// ---------------------------------------------------------------- Ensemble

Ensemble::Ensemble(std::vector<Tree> trees, std::vector<double> weights, int num_features,
                   int num_classes, std::vector<std::string> class_names)
    : trees_(std::move(trees)),
      weights_(std::move(weights)),
      num_features_(num_features),
      num_classes_(num_classes),
      class_names_(std::move(class_names)) {
  if (num_features_ <= 0) throw InputError("ensemble needs at least one feature");
  if (num_classes_ <= 0) throw InputError("ensemble needs at least one class");
  if (trees_.empty()) throw InputError("ensemble has no trees");
  if (weights_.size() != trees_.size())
    throw InputError("weight count " + std::to_string(weights_.size()) + " != tree count " +
                     std::to_string(trees_.size()));
  if (!class_names_.empty() && static_cast<int>(class_names_.size()) != num_classes_)
    throw InputError("class name count does not match K");

  bool any_positive = false;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0) throw InputError("weights must be finite and nonnegative");
    any_positive = any_positive || w > 0;
  }
  if (!any_positive) throw InputError("at least one weight must be positive");

  for (size_t t = 0; t < trees_.size(); ++t) {
    for (const Node& nd : trees_[t].nodes()) {
      if (nd.is_leaf() ? nd.leaf_class >= num_classes_ : nd.feature >= num_features_)
        throw InputError("tree " + std::to_string(t) +
                         (nd.is_leaf() ? ": leaf class out of range [0, K)"
                                       : ": split feature out of range [0, p)"));
    }
  }

  vote_weights_ = scale_weights(weights_);
  std::int64_t total = 0;
  for (auto w : vote_weights_) {
    if (w > std::numeric_limits<std::int64_t>::max() / 4 - total)
      throw InputError("weights too large to scale to exact integers");
    total += w;
  }
  if (total == 0) throw InputError("weights vanish after integer scaling");
}

bool operator==(const Ensemble& a, const Ensemble& b) {
  return a.num_features_ == b.num_features_ && a.num_classes_ == b.num_classes_ &&
         a.weights_ == b.weights_ && a.class_names_ == b.class_names_ && a.trees_ == b.trees_;
}

// ---------------------------------------------------------------- Region

bool Region::contains(const Cell& c) const {
  if (c.z.size() != lo.z.size()) return false;
  for (size_t j = 0; j < c.z.size(); ++j)
    if (c.z[j] < lo.z[j] || c.z[j] > hi.z[j]) return false;
  return true;
}

// ---------------------------------------------------------------- SplitUniverse

SplitUniverse::SplitUniverse(std::vector<std::vector<double>> levels) : levels_(std::move(levels)) {
  for (const auto& h : levels_) {
    for (size_t i = 0; i < h.size(); ++i) {
      if (!std::isfinite(h[i])) throw InputError("split levels must be finite");
      if (i > 0 && !(h[i - 1] < h[i]))
        throw InputError("split levels must be strictly increasing");
    }
  }
}

std::optional<int> SplitUniverse::level_of(int j, double threshold) const {
  const auto& h = levels_[static_cast<size_t>(j)];
  auto it = std::lower_bound(h.begin(), h.end(), threshold);
  if (it == h.end() || *it != threshold) return std::nullopt;
  return static_cast<int>(it - h.begin()) + 1;
}

int SplitUniverse::base_cell(int j, int z) const {
  if (representative_.empty()) return z;
  return representative_[static_cast<size_t>(j)][static_cast<size_t>(z - 1)];
}

int SplitUniverse::base_level_of(int j, double threshold) const {
  const auto& h = base_levels_.empty() ? levels_[static_cast<size_t>(j)]
                                       : base_levels_[static_cast<size_t>(j)];
  auto it = std::lower_bound(h.begin(), h.end(), threshold);
  if (it == h.end() || *it != threshold)
    throw InconsistencyError("threshold " + std::to_string(threshold) + " on feature " +
                             std::to_string(j) + " is not a split level of the universe");
  return static_cast<int>(it - h.begin()) + 1;
}

SplitUniverse SplitUniverse::restricted_to(const std::vector<std::vector<int>>& kept) const {
  if (static_cast<int>(kept.size()) != num_features())
    throw InputError("restriction must list levels for every feature");
  SplitUniverse out;
  out.base_levels_ = base_levels_.empty() ? levels_ : base_levels_;
  out.levels_.resize(kept.size());
  out.representative_.resize(kept.size());
  for (size_t j = 0; j < kept.size(); ++j) {
    // New cell k spans old cells (kept[k-2], kept[k-1]]; its first old cell
    // stands for it.
    int first_old_cell = 1;
    for (int level : kept[j]) {
      if (level < first_old_cell || level > num_levels(static_cast<int>(j)))
        throw InputError("restriction levels must be increasing and in range");
      out.levels_[j].push_back(threshold(static_cast<int>(j), level));
      out.representative_[j].push_back(base_cell(static_cast<int>(j), first_old_cell));
      first_old_cell = level + 1;
    }
    out.representative_[j].push_back(base_cell(static_cast<int>(j), first_old_cell));
  }
  return out;
}

std::optional<std::uint64_t> SplitUniverse::cell_count() const {
  std::uint64_t n = 1;
  for (int j = 0; j < num_features(); ++j) {
    const auto c = static_cast<std::uint64_t>(num_cells(j));
    if (n > std::numeric_limits<std::uint64_t>::max() / c) return std::nullopt;
    n *= c;
  }
  return n;
}

// ---------------------------------------------------------------- operations

SplitUniverse extract_split_levels(const Ensemble& ensemble) {
  std::vector<std::vector<double>> levels(static_cast<size_t>(ensemble.num_features()));
  for (const Tree& tree : ensemble.trees()) {
    for (const Node& nd : tree.nodes()) {
      if (nd.is_leaf()) continue;
      if (nd.feature < 0 || nd.feature >= ensemble.num_features())
        throw InputError("split feature out of range");
      levels[static_cast<size_t>(nd.feature)].push_back(nd.threshold);
    }
  }
  for (auto& h : levels) {
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
  }
  return SplitUniverse(std::move(levels));
}

Region full_region(const SplitUniverse& universe) {
  Region r;
  r.lo.z.assign(static_cast<size_t>(universe.num_features()), 1);
  r.hi.z.resize(static_cast<size_t>(universe.num_features()));
  for (int j = 0; j < universe.num_features(); ++j)
    r.hi.z[static_cast<size_t>(j)] = universe.num_cells(j);
  return r;
}

int tree_class_of_cell(const Tree& tree, std::span<const int> z, const SplitUniverse& universe) {
  const Node* nd = &tree.node(tree.root());
  while (!nd->is_leaf()) {
    const int zj = universe.base_cell(nd->feature, z[static_cast<size_t>(nd->feature)]);
    const int level = universe.base_level_of(nd->feature, nd->threshold);
    nd = &tree.node(zj <= level ? nd->le : nd->gt);
  }
  return nd->leaf_class;
}

int weighted_majority(std::span<const std::int64_t> votes) {
  int best = 0;
  for (size_t k = 1; k < votes.size(); ++k)
    if (votes[k] > votes[static_cast<size_t>(best)]) best = static_cast<int>(k);
  return best;
}

int ensemble_class_of_cell(const Ensemble& ensemble, std::span<const int> z,
                           const SplitUniverse& universe) {
  if (static_cast<int>(z.size()) != ensemble.num_features() ||
      universe.num_features() != ensemble.num_features())
    throw InputError("cell dimension does not match the ensemble");
  std::vector<std::int64_t> votes(static_cast<size_t>(ensemble.num_classes()), 0);
  const auto& trees = ensemble.trees();
  for (size_t t = 0; t < trees.size(); ++t)
    votes[static_cast<size_t>(tree_class_of_cell(trees[t], z, universe))] +=
        ensemble.vote_weights()[t];
  return weighted_majority(votes);
}

int ensemble_class_of_sample(const Ensemble& ensemble, std::span<const double> x) {
  if (static_cast<int>(x.size()) != ensemble.num_features())
    throw InputError("sample has " + std::to_string(x.size()) + " features, expected " +
                     std::to_string(ensemble.num_features()));
  std::vector<std::int64_t> votes(static_cast<size_t>(ensemble.num_classes()), 0);
  const auto& trees = ensemble.trees();
  for (size_t t = 0; t < trees.size(); ++t)
    votes[static_cast<size_t>(trees[t].class_of_sample(x))] += ensemble.vote_weights()[t];
  return weighted_majority(votes);
}

BigCount count_cells(const SplitUniverse& universe) {
  BigCount n = 1;
  for (int j = 0; j < universe.num_features(); ++j) n *= universe.num_cells(j);
  return n;
}

BigCount count_regions(const SplitUniverse& universe) {
  BigCount n = 1;
  for (int j = 0; j < universe.num_features(); ++j) {
    const BigCount c = universe.num_cells(j);
    n *= c * (c + 1) / 2;
  }
  return n;
}

FilterResult filter_redundant_hyperplanes(const Ensemble& ensemble, const SplitUniverse& universe,
                                          std::uint64_t cell_cap) {
  FilterResult result{universe, false, 0};
  const auto cells = universe.cell_count();
  if (!cells || *cells > cell_cap || ensemble.num_classes() > 255) {
    result.skipped = true;
    return result;
  }
  const CellClassifier classifier(ensemble, universe, std::max<std::uint64_t>(cell_cap, 1));
  const auto table = classifier.table();
  const auto strides = classifier.strides();

  std::vector<std::vector<int>> kept(static_cast<size_t>(universe.num_features()));
  for (int j = 0; j < universe.num_features(); ++j) {
    const std::uint64_t stride = strides[static_cast<size_t>(j)];
    const std::uint64_t block = stride * static_cast<std::uint64_t>(universe.num_cells(j));
    const std::uint64_t outer = *cells / block;
    for (int level = 1; level <= universe.num_levels(j); ++level) {
      bool changes = false;
      const std::uint64_t offset = static_cast<std::uint64_t>(level - 1) * stride;
      for (std::uint64_t o = 0; o < outer && !changes; ++o) {
        const std::uint64_t base = o * block + offset;
        for (std::uint64_t i = 0; i < stride; ++i) {
          if (table[base + i] != table[base + i + stride]) {
            changes = true;
            break;
          }
        }
      }
      if (changes)
        kept[static_cast<size_t>(j)].push_back(level);
      else
        ++result.removed_levels;
    }
  }
  result.universe = universe.restricted_to(kept);
  return result;
}

}  // namespace bornagain

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bornagain {

using BigCount = boost::multiprecision::cpp_int;

// A node of an ensemble member. Internal nodes send `x[feature] <= threshold`
// to `le` and everything else to `gt`; leaves carry a class index.
struct Node {
  int feature = -1;
  double threshold = 0.0;
  int le = -1;
  int gt = -1;
  int leaf_class = -1;

  bool is_leaf() const { return feature < 0; }

  static Node leaf(int k) { return Node{-1, 0.0, -1, -1, k}; }
  static Node split(int feature, double threshold, int le, int gt) {
    return Node{feature, threshold, le, gt, -1};
  }
};

// Flat, immutable binary decision tree. The constructor checks that the nodes
// reachable from `root` form a proper binary tree in which every stored node
// is used exactly once.
class Tree {
 public:
  explicit Tree(std::vector<Node> nodes, int root = 0);

  static Tree constant(int k);
  static Tree stump(int feature, double threshold, int le_class, int gt_class);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  int root() const { return root_; }
  int depth() const { return depth_; }
  int num_leaves() const { return leaves_; }

  int class_of_sample(std::span<const double> x) const;

  friend bool operator==(const Tree& a, const Tree& b);

 private:
  std::vector<Node> nodes_;
  int root_ = 0;
  int depth_ = 0;
  int leaves_ = 0;
};

// Weighted set of trees over `num_features` real features and `num_classes`
// classes. Weights are converted to exact integers (common decimal scale,
// divided by their gcd) so that weighted votes never tie because of rounding.
class Ensemble {
 public:
  Ensemble(std::vector<Tree> trees, std::vector<double> weights,
           int num_features, int num_classes,
           std::vector<std::string> class_names = {});

  const std::vector<Tree>& trees() const { return trees_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const std::int64_t> vote_weights() const { return vote_weights_; }
  int num_features() const { return num_features_; }
  int num_classes() const { return num_classes_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  friend bool operator==(const Ensemble& a, const Ensemble& b);

 private:
  std::vector<Tree> trees_;
  std::vector<double> weights_;
  std::vector<std::int64_t> vote_weights_;
  int num_features_ = 0;
  int num_classes_ = 0;
  std::vector<std::string> class_names_;
};

// Level-index vector z with z_j in [1, |H_j|+1].
struct Cell {
  std::vector<int> z;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Box of cells between two corners, lo <= hi componentwise.
struct Region {
  Cell lo;
  Cell hi;

  bool is_single_cell() const { return lo == hi; }
  bool contains(const Cell& c) const;
  friend bool operator==(const Region&, const Region&) = default;
};

// Per-feature sorted split levels H_j. A universe produced by hyperplane
// filtering remembers which cell of the unfiltered universe stands for each
// of its own cells, so trees can still be evaluated on it.
class SplitUniverse {
 public:
  SplitUniverse() = default;
  explicit SplitUniverse(std::vector<std::vector<double>> levels);

  int num_features() const { return static_cast<int>(levels_.size()); }
  int num_levels(int j) const { return static_cast<int>(levels_[static_cast<size_t>(j)].size()); }
  int num_cells(int j) const { return num_levels(j) + 1; }
  std::span<const double> levels(int j) const { return levels_[static_cast<size_t>(j)]; }
  const std::vector<std::vector<double>>& all_levels() const { return levels_; }

  // H_j[level] with 1-based `level`.
  double threshold(int j, int level) const {
    return levels_[static_cast<size_t>(j)][static_cast<size_t>(level - 1)];
  }
  // 1-based index of `threshold` in H_j, if present.
  std::optional<int> level_of(int j, double threshold) const;

  bool is_filtered() const { return !representative_.empty(); }
  // Cell index along feature j of the unfiltered universe standing for `z`.
  int base_cell(int j, int z) const;
  // 1-based index of `threshold` among the unfiltered levels of feature j;
  // throws InconsistencyError when absent.
  int base_level_of(int j, double threshold) const;

  // Keeps, for every feature, only the listed 1-based levels.
  SplitUniverse restricted_to(const std::vector<std::vector<int>>& kept) const;

  std::optional<std::uint64_t> cell_count() const;

  friend bool operator==(const SplitUniverse&, const SplitUniverse&) = default;

 private:
  std::vector<std::vector<double>> levels_;
  std::vector<std::vector<double>> base_levels_;
  std::vector<std::vector<int>> representative_;
};

SplitUniverse extract_split_levels(const Ensemble& ensemble);

Region full_region(const SplitUniverse& universe);

int tree_class_of_cell(const Tree& tree, std::span<const int> z,
                       const SplitUniverse& universe);
int ensemble_class_of_cell(const Ensemble& ensemble, std::span<const int> z,
                           const SplitUniverse& universe);
int ensemble_class_of_sample(const Ensemble& ensemble, std::span<const double> x);

// Argmax of `votes`, ties to the smallest class index.
int weighted_majority(std::span<const std::int64_t> votes);

BigCount count_cells(const SplitUniverse& universe);
BigCount count_regions(const SplitUniverse& universe);

struct FilterResult {
  SplitUniverse universe;
  bool skipped = false;
  int removed_levels = 0;
};

inline constexpr std::uint64_t kDefaultFilterCellCap = 10'000'000;

// Drops level l of feature j when crossing it never changes the ensemble
// class, i.e. F(z) == F(z + e_j) for every cell with z_j == l.
FilterResult filter_redundant_hyperplanes(
    const Ensemble& ensemble, const SplitUniverse& universe,
    std::uint64_t cell_cap = kDefaultFilterCellCap);

}  // namespace bornagain

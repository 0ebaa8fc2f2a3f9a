#include "bornagain/verify.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <string>

#include "bornagain/cell_classifier.h"
#include "bornagain/error.h"

namespace bornagain {
namespace {

// Tree nodes with their thresholds resolved to levels of one universe.
struct LeveledTree {
  struct Entry {
    int feature;
    int level;  // class for leaves
    int le;
    int gt;
  };
  std::vector<Entry> nodes;
  int root = 0;

  LeveledTree(const Tree& tree, const SplitUniverse& universe) : root(tree.root()) {
    for (const Node& nd : tree.nodes()) {
      if (nd.is_leaf()) {
        nodes.push_back({-1, nd.leaf_class, -1, -1});
        continue;
      }
      if (nd.feature >= universe.num_features())
        throw InconsistencyError("tree splits on a feature outside the universe");
      const auto level = universe.level_of(nd.feature, nd.threshold);
      if (!level)
        throw InconsistencyError("tree threshold " + std::to_string(nd.threshold) +
                                 " is not a split level of feature " +
                                 std::to_string(nd.feature));
      nodes.push_back({nd.feature, *level, nd.le, nd.gt});
    }
  }

  int classify(std::span<const int> z) const {
    const Entry* e = &nodes[static_cast<size_t>(root)];
    while (e->feature >= 0)
      e = &nodes[static_cast<size_t>(z[static_cast<size_t>(e->feature)] <= e->level ? e->le : e->gt)];
    return e->level;
  }
};

std::uint64_t region_cells(const Region& region) {
  std::uint64_t n = 1;
  for (size_t j = 0; j < region.lo.z.size(); ++j) {
    const auto w = static_cast<std::uint64_t>(region.hi.z[j] - region.lo.z[j] + 1);
    if (n > kBruteForceCellCap / w + 1) return kBruteForceCellCap + 1;
    n *= w;
  }
  return n;
}

// The depth recurrence over every split, without bounds or search. Labels of
// every cell of the root region are computed once with the reference evaluator.
class BruteForce {
 public:
  enum class Metric { kDepth, kSplits };

  BruteForce(const Region& root, const Ensemble& ensemble, const SplitUniverse& universe,
             Metric metric)
      : root_(root), metric_(metric) {
    if (root.lo.z.size() != static_cast<size_t>(universe.num_features()))
      throw InputError("region dimension does not match the universe");
    if (region_cells(root) > kBruteForceCellCap)
      throw CapacityError("brute-force oracle is limited to " +
                          std::to_string(kBruteForceCellCap) + " cells");
    std::uint64_t stride = 1;
    for (size_t j = 0; j < root.lo.z.size(); ++j) {
      strides_.push_back(stride);
      stride *= static_cast<std::uint64_t>(root.hi.z[j] - root.lo.z[j] + 1);
    }
    labels_.resize(stride);
    std::vector<int> z = root.lo.z;
    for (std::uint64_t i = 0; i < stride; ++i) {
      labels_[index(z)] = ensemble_class_of_cell(ensemble, z, universe);
      for (size_t j = 0; j < z.size(); ++j) {
        if (z[j] < root.hi.z[j]) {
          ++z[j];
          break;
        }
        z[j] = root.lo.z[j];
      }
    }
  }

  int value(const Region& r) {
    std::vector<int> key = r.lo.z;
    key.insert(key.end(), r.hi.z.begin(), r.hi.z.end());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    int best = 0;
    if (!homogeneous(r)) {
      best = std::numeric_limits<int>::max();
      for (size_t j = 0; j < r.lo.z.size(); ++j) {
        for (int l = r.lo.z[j]; l < r.hi.z[j]; ++l) {
          Region left = r;
          left.hi.z[j] = l;
          Region right = r;
          right.lo.z[j] = l + 1;
          const int a = value(left);
          const int b = value(right);
          const int v = metric_ == Metric::kDepth ? 1 + std::max(a, b) : 1 + a + b;
          best = std::min(best, v);
        }
      }
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  std::uint64_t index(std::span<const int> z) const {
    std::uint64_t i = 0;
    for (size_t j = 0; j < z.size(); ++j)
      i += static_cast<std::uint64_t>(z[j] - root_.lo.z[j]) * strides_[j];
    return i;
  }

  bool homogeneous(const Region& r) const {
    const int first = labels_[index(r.lo.z)];
    bool same = true;
    for_each_cell(r, [&](std::span<const int> z) {
      same = labels_[index(z)] == first;
      return same;
    });
    return same;
  }

  Region root_;
  Metric metric_;
  std::vector<std::uint64_t> strides_;
  std::vector<int> labels_;
  std::map<std::vector<int>, int> memo_;
};

}  // namespace

VerificationReport verify_faithfulness(const BornAgainTree& tree, const Ensemble& ensemble,
                                       const SplitUniverse& universe, std::uint64_t cell_cap) {
  const auto start = std::chrono::steady_clock::now();
  const auto cells = universe.cell_count();
  if (!cells || *cells > cell_cap)
    throw CapacityError("faithfulness check needs " +
                        (cells ? std::to_string(*cells) : std::string("more than 2^64")) +
                        " cells, cap is " + std::to_string(cell_cap));
  const LeveledTree leveled(tree.tree(), universe);
  const CellClassifier classifier(ensemble, universe);

  VerificationReport report;
  const Region all = full_region(universe);
  std::vector<int> z = all.lo.z;
  const size_t p = z.size();
  // Lexicographic order: the last feature varies fastest.
  while (true) {
    ++report.cells_checked;
    if (leveled.classify(z) != classifier.classify(z)) {
      report.faithful = false;
      report.counterexample = Cell{z};
      break;
    }
    size_t j = p;
    while (j > 0 && z[j - 1] == all.hi.z[j - 1]) {
      z[j - 1] = 1;
      --j;
    }
    if (j == 0) break;
    ++z[j - 1];
  }
  report.millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

int brute_force_min_depth(const Region& region, const Ensemble& ensemble,
                          const SplitUniverse& universe) {
  BruteForce oracle(region, ensemble, universe, BruteForce::Metric::kDepth);
  return oracle.value(region);
}

int brute_force_min_splits(const Region& region, const Ensemble& ensemble,
                           const SplitUniverse& universe) {
  BruteForce oracle(region, ensemble, universe, BruteForce::Metric::kSplits);
  return oracle.value(region);
}

Ensemble generate_tight_bound_ensemble(int d) {
  if (d < 1) throw InputError("tight family needs d >= 1");
  std::vector<Tree> trees;
  for (int i = 0; i < d; ++i) trees.push_back(Tree::stump(i, 0.0, 0, 1));
  for (int i = 0; i + 1 < d; ++i) trees.push_back(Tree::constant(1));
  std::vector<double> weights(trees.size(), 1.0);
  return Ensemble(std::move(trees), std::move(weights), d, 2);
}

int sum_depth_bound(const Ensemble& ensemble) {
  int total = 0;
  for (const Tree& t : ensemble.trees()) total += t.depth();
  return total;
}

Metrics compute_metrics(const std::function<int(std::span<const double>)>& predict,
                        const SampleSet& samples, int num_classes) {
  if (samples.empty()) throw InputError("metrics need at least one sample");
  samples.check_labels(num_classes);
  const auto k = static_cast<size_t>(num_classes);
  std::vector<std::uint64_t> tp(k, 0), fp(k, 0), fn(k, 0);
  std::uint64_t correct = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const int predicted = predict(samples.row(i));
    const int actual = samples.label(i);
    if (predicted < 0 || predicted >= num_classes)
      throw InconsistencyError("classifier predicted class outside [0, K)");
    if (predicted == actual) {
      ++correct;
      ++tp[static_cast<size_t>(actual)];
    } else {
      ++fp[static_cast<size_t>(predicted)];
      ++fn[static_cast<size_t>(actual)];
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  double f1_sum = 0.0;
  for (size_t c = 0; c < k; ++c) {
    const std::uint64_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom > 0) f1_sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  m.f1 = f1_sum / static_cast<double>(k);
  return m;
}

Metrics compute_metrics(const Ensemble& ensemble, const SampleSet& samples) {
  Metrics m = compute_metrics(
      [&](std::span<const double> x) { return ensemble_class_of_sample(ensemble, x); }, samples,
      ensemble.num_classes());
  for (const Tree& t : ensemble.trees()) {
    m.depth = std::max(m.depth, t.depth());
    m.leaves += t.num_leaves();
  }
  return m;
}

Metrics compute_metrics(const BornAgainTree& tree, const SampleSet& samples, int num_classes) {
  Metrics m = compute_metrics([&](std::span<const double> x) { return tree.class_of_sample(x); },
                              samples, num_classes);
  m.depth = tree.depth();
  m.leaves = tree.num_leaves();
  return m;
}

}  // namespace bornagain

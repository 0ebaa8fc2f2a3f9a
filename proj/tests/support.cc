#include "support.h"

#include <algorithm>
#include <climits>
#include <map>
#include <random>

namespace bornagain::testing {
namespace {

int pick(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

int grow(std::mt19937_64& rng, const std::vector<std::vector<double>>& pool, int depth,
         int max_depth, int k, std::vector<Node>& nodes) {
  const bool leaf = depth == max_depth || (depth > 0 && pick(rng, 0, 9) < 3);
  if (leaf) {
    nodes.push_back(Node::leaf(pick(rng, 0, k - 1)));
    return static_cast<int>(nodes.size()) - 1;
  }
  const int j = pick(rng, 0, static_cast<int>(pool.size()) - 1);
  const auto& thr = pool[static_cast<size_t>(j)];
  const double t = thr[static_cast<size_t>(pick(rng, 0, static_cast<int>(thr.size()) - 1))];
  const int slot = static_cast<int>(nodes.size());
  nodes.push_back(Node::leaf(0));
  const int le = grow(rng, pool, depth + 1, max_depth, k, nodes);
  const int gt = grow(rng, pool, depth + 1, max_depth, k, nodes);
  nodes[static_cast<size_t>(slot)] = Node::split(j, t, le, gt);
  return slot;
}

class RegionOracle {
 public:
  RegionOracle(const Ensemble& ensemble, const SplitUniverse& universe, bool depth)
      : depth_(depth) {
    for (int j = 0; j < universe.num_features(); ++j) sizes_.push_back(universe.num_cells(j));
    for (const auto& z : all_cells(universe))
      labels_[z] = oracle_ensemble_class(ensemble, representative(universe, z));
  }

  int solve() {
    std::vector<int> lo(sizes_.size(), 1);
    return value(lo, sizes_);
  }

 private:
  bool homogeneous(const std::vector<int>& lo, const std::vector<int>& hi) const {
    int first = -1;
    for (const auto& [z, k] : labels_) {
      bool inside = true;
      for (size_t j = 0; j < z.size(); ++j) inside = inside && lo[j] <= z[j] && z[j] <= hi[j];
      if (!inside) continue;
      if (first < 0) first = k;
      if (k != first) return false;
    }
    return true;
  }

  int value(const std::vector<int>& lo, const std::vector<int>& hi) {
    auto key = std::make_pair(lo, hi);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int best = 0;
    if (!homogeneous(lo, hi)) {
      best = INT_MAX;
      for (size_t j = 0; j < lo.size(); ++j) {
        for (int l = lo[j]; l < hi[j]; ++l) {
          auto left_hi = hi;
          left_hi[j] = l;
          auto right_lo = lo;
          right_lo[j] = l + 1;
          const int a = value(lo, left_hi);
          const int b = value(right_lo, hi);
          best = std::min(best, depth_ ? 1 + std::max(a, b) : 1 + a + b);
        }
      }
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

  bool depth_;
  std::vector<int> sizes_;
  std::map<std::vector<int>, int> labels_;
  std::map<std::pair<std::vector<int>, std::vector<int>>, int> memo_;
};

}  // namespace

Ensemble random_ensemble(std::uint64_t seed, const RandomSpec& spec) {
  std::mt19937_64 rng(seed);
  const int p = pick(rng, spec.min_features, spec.max_features);
  const int k = pick(rng, spec.min_classes, spec.max_classes);
  std::vector<std::vector<double>> pool(static_cast<size_t>(p));
  for (auto& thr : pool) {
    const int n = pick(rng, 1, spec.max_levels);
    while (static_cast<int>(thr.size()) < n) {
      const double t = pick(rng, -12, 12) * 0.25;
      if (std::find(thr.begin(), thr.end(), t) == thr.end()) thr.push_back(t);
    }
  }
  const int t = pick(rng, spec.min_trees, spec.max_trees);
  static constexpr double kWeights[] = {1.0, 1.0, 0.5, 1.25, 2.0};
  std::vector<Tree> trees;
  std::vector<double> weights;
  for (int i = 0; i < t; ++i) {
    std::vector<Node> nodes;
    grow(rng, pool, 0, spec.max_depth, k, nodes);
    trees.emplace_back(std::move(nodes));
    weights.push_back(kWeights[pick(rng, 0, 4)]);
  }
  return Ensemble(std::move(trees), std::move(weights), p, k);
}

std::vector<double> representative(const SplitUniverse& universe, std::span<const int> z) {
  std::vector<double> x(z.size());
  for (size_t j = 0; j < z.size(); ++j) {
    const auto h = universe.levels(static_cast<int>(j));
    const auto c = static_cast<size_t>(z[j]);
    if (h.empty())
      x[j] = 0.0;
    else if (c == 1)
      x[j] = h.front() - 1.0;
    else if (c == h.size() + 1)
      x[j] = h.back() + 1.0;
    else
      x[j] = (h[c - 2] + h[c - 1]) / 2.0;
  }
  return x;
}

std::vector<std::vector<int>> all_cells(const SplitUniverse& universe) {
  std::vector<std::vector<int>> out;
  std::vector<int> z(static_cast<size_t>(universe.num_features()), 1);
  while (true) {
    out.push_back(z);
    size_t j = 0;
    while (j < z.size() && z[j] == universe.num_cells(static_cast<int>(j))) z[j++] = 1;
    if (j == z.size()) return out;
    ++z[j];
  }
}

int oracle_tree_class(const Tree& tree, std::span<const double> x) {
  const auto nodes = tree.nodes();
  int i = tree.root();
  while (nodes[static_cast<size_t>(i)].feature >= 0) {
    const Node& n = nodes[static_cast<size_t>(i)];
    i = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.le : n.gt;
  }
  return nodes[static_cast<size_t>(i)].leaf_class;
}

int oracle_ensemble_class(const Ensemble& ensemble, std::span<const double> x) {
  std::vector<double> votes(static_cast<size_t>(ensemble.num_classes()), 0.0);
  for (size_t t = 0; t < ensemble.trees().size(); ++t)
    votes[static_cast<size_t>(oracle_tree_class(ensemble.trees()[t], x))] += ensemble.weights()[t];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

int oracle_min_depth(const Ensemble& ensemble, const SplitUniverse& universe) {
  return RegionOracle(ensemble, universe, true).solve();
}

int oracle_min_splits(const Ensemble& ensemble, const SplitUniverse& universe) {
  return RegionOracle(ensemble, universe, false).solve();
}

SampleSet random_samples(const Ensemble& ensemble, int n, std::uint64_t seed) {
  const SplitUniverse universe = extract_split_levels(ensemble);
  std::mt19937_64 rng(seed);
  SampleSet samples(ensemble.num_features());
  std::vector<double> x(static_cast<size_t>(ensemble.num_features()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ensemble.num_features(); ++j) {
      const auto h = universe.levels(j);
      const double lo = h.empty() ? -1.0 : h.front() - 1.0;
      const double hi = h.empty() ? 1.0 : h.back() + 1.0;
      x[static_cast<size_t>(j)] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    samples.add(x, oracle_ensemble_class(ensemble, x));
  }
  return samples;
}

}  // namespace bornagain::testing

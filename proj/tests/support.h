#pragma once

// Instance generators and reference oracles shared by the unit tests and the
// acceptance runner. The oracles deliberately avoid the library's cell
// machinery: they evaluate trees on real-valued representative points and
// enumerate regions by plain recursion.

#include <cstdint>
#include <span>
#include <vector>

#include "bornagain/forest.h"
#include "bornagain/samples.h"

namespace bornagain::testing {

struct RandomSpec {
  int min_features = 2;
  int max_features = 5;
  int max_levels = 4;  // distinct thresholds available per feature
  int min_trees = 1;
  int max_trees = 5;
  int max_depth = 3;
  int min_classes = 2;
  int max_classes = 3;
};

// Weights are multiples of 1/4 so that double vote sums are exact.
Ensemble random_ensemble(std::uint64_t seed, const RandomSpec& spec = {});

// Point strictly inside cell z: midpoint of the bounding thresholds, or one
// unit beyond the outermost threshold on unbounded sides.
std::vector<double> representative(const SplitUniverse& universe, std::span<const int> z);

std::vector<std::vector<int>> all_cells(const SplitUniverse& universe);

int oracle_tree_class(const Tree& tree, std::span<const double> x);
int oracle_ensemble_class(const Ensemble& ensemble, std::span<const double> x);

// Optimal depth / split count of a faithful tree over the whole universe,
// by exhaustive recursion over every region and split. Tiny inputs only.
int oracle_min_depth(const Ensemble& ensemble, const SplitUniverse& universe);
int oracle_min_splits(const Ensemble& ensemble, const SplitUniverse& universe);

// `n` points drawn uniformly from [lowest - 1, highest + 1] per feature,
// labelled by the ensemble.
SampleSet random_samples(const Ensemble& ensemble, int n, std::uint64_t seed);

}  // namespace bornagain::testing

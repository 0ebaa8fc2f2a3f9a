#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "bornagain/born_again_tree.h"
#include "bornagain/forest.h"
#include "bornagain/samples.h"

namespace bornagain {

struct VerificationReport {
  bool faithful = true;
  std::optional<Cell> counterexample;  // lowest mismatching cell, lexicographic
  std::uint64_t cells_checked = 0;
  double millis = 0.0;
};

inline constexpr std::uint64_t kDefaultVerifyCellCap = 200'000'000;

// Compares tree and ensemble on every cell of `universe`. Both functions are
// constant on cells, so agreement on all cells is agreement everywhere.
VerificationReport verify_faithfulness(const BornAgainTree& tree, const Ensemble& ensemble,
                                       const SplitUniverse& universe,
                                       std::uint64_t cell_cap = kDefaultVerifyCellCap);

// Plain recursion over all splits, homogeneity by full cell scan, no
// bounding and no binary search. Ground truth for tiny regions only.
inline constexpr std::uint64_t kBruteForceCellCap = 10'000;
int brute_force_min_depth(const Region& region, const Ensemble& ensemble,
                          const SplitUniverse& universe);
int brute_force_min_splits(const Region& region, const Ensemble& ensemble,
                           const SplitUniverse& universe);

// d stumps "x_i <= 0 -> 0 else 1" on distinct features plus d - 1 constant
// class-1 trees, all with unit weight. Class 0 wins only where every x_i <= 0,
// so a faithful tree needs depth d, the sum of the member depths.
Ensemble generate_tight_bound_ensemble(int d);

// Sum of member tree depths, an upper bound on the optimal depth.
int sum_depth_bound(const Ensemble& ensemble);

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;  // macro average over all classes
  int depth = 0;
  int leaves = 0;
};

Metrics compute_metrics(const std::function<int(std::span<const double>)>& predict,
                        const SampleSet& samples, int num_classes);
Metrics compute_metrics(const Ensemble& ensemble, const SampleSet& samples);
Metrics compute_metrics(const BornAgainTree& tree, const SampleSet& samples, int num_classes);

}  // namespace bornagain

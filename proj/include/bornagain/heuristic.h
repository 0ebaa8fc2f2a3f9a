#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "bornagain/born_again_tree.h"
#include "bornagain/cell_classifier.h"
#include "bornagain/forest.h"

namespace bornagain {

enum class HomogeneityOracleKind { kExhaustive, kPluggable };

struct HeuristicConfig {
  int cells_per_region = 1000;
  std::uint64_t seed = 0;
  HomogeneityOracleKind oracle = HomogeneityOracleKind::kExhaustive;
  // Largest region the exhaustive oracle agrees to scan.
  std::uint64_t cell_cap = 10'000'000;
};

struct Homogeneous {
  int cls = 0;
};
struct Witness {
  Cell cell;  // first cell whose class differs from the lower corner's
  int cls = 0;
};
using HomogeneityResult = std::variant<Homogeneous, Witness>;

// Decides whether every cell of a region has the same ensemble class.
class HomogeneityOracle {
 public:
  virtual ~HomogeneityOracle() = default;
  virtual HomogeneityResult check(const Region& region) const = 0;
};

// Scans the cells of the region, stopping at the first disagreement.
class ExhaustiveHomogeneityOracle final : public HomogeneityOracle {
 public:
  ExhaustiveHomogeneityOracle(const CellClassifier& classifier, std::uint64_t cell_cap)
      : classifier_(classifier), cell_cap_(cell_cap) {}
  HomogeneityResult check(const Region& region) const override;

 private:
  const CellClassifier& classifier_;
  std::uint64_t cell_cap_;
};

HomogeneityResult is_region_homogeneous(const Region& region, const CellClassifier& classifier,
                                        std::uint64_t cell_cap);

// `count` cells drawn with replacement, each coordinate uniform on
// [lo_j, hi_j].
std::vector<Cell> sample_region_cells(const Region& region, int count, std::mt19937_64& rng);

struct SplitChoice {
  int feature = 0;
  int level = 0;  // left child keeps z_j <= level
  double gain = 0.0;
};

// Information gain (bits) of each split z_j <= l with lo_j <= l < hi_j over
// the labelled cells; ties go to the smallest (feature, level). Returns
// nullopt when all labels agree or the region is a single cell.
std::optional<SplitChoice> best_information_gain_split(const Region& region,
                                                       std::span<const Cell> cells,
                                                       std::span<const int> labels,
                                                       int num_classes);

// Faithful, not necessarily minimal, tree. Regions are split on sampled
// information gain until the oracle proves every leaf region homogeneous.
BornAgainTree heuristic_born_again(const Ensemble& ensemble, const HeuristicConfig& config);
BornAgainTree heuristic_born_again(const CellClassifier& classifier,
                                   const HeuristicConfig& config,
                                   const HomogeneityOracle& oracle);

}  // namespace bornagain

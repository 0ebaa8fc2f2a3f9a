#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "bornagain/born_again_tree.h"
#include "bornagain/cell_classifier.h"
#include "bornagain/forest.h"

namespace bornagain {

// Size metric minimized by the dynamic program.
//   kDepth            -> value is the depth.
//   kLeaves           -> value is the number of splits (leaves - 1).
//   kDepthThenLeaves  -> value is M * depth + splits, M > any split count.
enum class Objective { kDepth, kLeaves, kDepthThenLeaves };

std::string_view objective_name(Objective objective);
std::optional<Objective> parse_objective(std::string_view name);

// How the depth objective scans the levels of one feature. kLinear exists as
// a reference for the binary search and is never faster.
enum class DepthSearch { kBinary, kLinear };

inline constexpr std::uint64_t kDefaultMaxMemoEntries = 100'000'000;
inline constexpr std::uint64_t kDefaultDenseMemoBytes = std::uint64_t{4} << 30;

struct SolverOptions {
  Objective objective = Objective::kDepth;
  DepthSearch depth_search = DepthSearch::kBinary;
  // Limit for hashed memos. A dense memo (one slot per region of the
  // universe) is used instead when it fits in dense_memo_bytes.
  std::uint64_t max_memo_entries = kDefaultMaxMemoEntries;
  std::uint64_t dense_memo_bytes = kDefaultDenseMemoBytes;
};

struct SolverStats {
  std::uint64_t recursions = 0;
  std::uint64_t memo_hits = 0;
  std::uint64_t memo_entries = 0;
  double millis = 0.0;
};

// Memoized dynamic program over regions of the classifier's universe. One
// solver owns one memo; values computed by earlier calls are reused by later
// ones. Memo keys pack the 2p corner indices in mixed radix into 64 or 128
// bits when the region count allows it, and fall back to vector keys.
// Throws CapacityError when a hashed memo would exceed `max_memo_entries`.
class BornAgainSolver {
 public:
  BornAgainSolver(const CellClassifier& classifier, SolverOptions options);
  ~BornAgainSolver();
  BornAgainSolver(BornAgainSolver&&) noexcept;
  BornAgainSolver& operator=(BornAgainSolver&&) noexcept;

  // Optimal objective value of `region`.
  std::uint64_t optimal_value(const Region& region);

  // Rebuilds an optimal tree from the memo. `value` must be the value
  // returned by optimal_value() for the same region.
  BornAgainTree extract_optimal_tree(const Region& region, std::uint64_t value) const;

  // Memoized value; single cells report 0 without being stored.
  std::optional<std::uint64_t> memo_value(const Region& region) const;
  std::vector<std::pair<Region, std::uint64_t>> memo_entries() const;

  // M for the depth-then-leaves encoding (count of cells + 1); 0 otherwise.
  std::uint64_t dl_scale() const;
  Objective objective() const;
  const SolverStats& stats() const;
  const CellClassifier& classifier() const;

  class Engine;

 private:
  std::unique_ptr<Engine> engine_;
};

// Decoded objective value.
struct TreeSize {
  int depth = 0;
  std::uint64_t splits = 0;
};
TreeSize decode_depth_then_splits(std::uint64_t value, std::uint64_t scale);

std::uint64_t born_again_depth(const CellClassifier& classifier, const Region& region);
std::uint64_t born_again_splits(const CellClassifier& classifier, const Region& region);
std::uint64_t born_again_depth_then_splits(const CellClassifier& classifier,
                                           const Region& region);

struct SolveConfig {
  Objective objective = Objective::kDepth;
  bool filter_hyperplanes = true;
  std::uint64_t filter_cell_cap = kDefaultFilterCellCap;
  std::uint64_t table_cell_cap = CellClassifier::kDefaultTableCap;
  std::uint64_t max_memo_entries = kDefaultMaxMemoEntries;
  std::uint64_t dense_memo_bytes = kDefaultDenseMemoBytes;
  DepthSearch depth_search = DepthSearch::kBinary;
  // Exhaustive faithfulness check after extraction. Unset means "only when
  // the unfiltered universe has at most self_check_cell_cap cells".
  std::optional<bool> self_check;
  std::uint64_t self_check_cell_cap = 1'000'000;
};

struct SolveResult {
  BornAgainTree tree;
  std::uint64_t value = 0;
  SplitUniverse universe;         // extracted from the ensemble
  SplitUniverse solve_universe;   // after optional filtering
  bool filter_skipped = false;
  int removed_levels = 0;
  std::optional<bool> faithful;   // set when the self-check ran
  SolverStats stats;
};

// Extract levels, optionally filter, solve the full-space region, extract the
// optimal tree and optionally verify it against every cell.
SolveResult solve(const Ensemble& ensemble, const SolveConfig& config);

}  // namespace bornagain

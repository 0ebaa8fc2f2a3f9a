#include "bornagain/heuristic.h"

#include <cmath>
#include <string>

#include "bornagain/error.h"

namespace bornagain {
namespace {

double entropy(std::span<const std::uint64_t> counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / static_cast<double>(total);
    h -= q * std::log2(q);
  }
  return h;
}

std::uint64_t region_cell_count(const Region& region, std::uint64_t cap) {
  std::uint64_t n = 1;
  for (size_t j = 0; j < region.lo.z.size(); ++j) {
    const auto w = static_cast<std::uint64_t>(region.hi.z[j] - region.lo.z[j] + 1);
    if (n > cap / w) return cap + 1;
    n *= w;
  }
  return n;
}

class HeuristicBuilder {
 public:
  HeuristicBuilder(const CellClassifier& classifier, const HeuristicConfig& config,
                   const HomogeneityOracle& oracle)
      : classifier_(classifier), config_(config), oracle_(oracle), rng_(config.seed) {}

  int build(const Region& region) {
    std::vector<Cell> cells = sample_region_cells(region, config_.cells_per_region, rng_);
    std::vector<int> labels;
    labels.reserve(cells.size());
    for (const Cell& c : cells) labels.push_back(classifier_.classify(c.z));

    auto split = best_information_gain_split(region, cells, labels, classifier_.num_classes());
    if (!split) {
      const HomogeneityResult verdict = oracle_.check(region);
      if (const auto* h = std::get_if<Homogeneous>(&verdict)) return builder_.add_leaf(h->cls);
      const auto& witness = std::get<Witness>(verdict);
      cells.push_back(witness.cell);
      labels.push_back(witness.cls);
      // The witness only differs from the lower corner, which the pool may
      // not agree with.
      if (witness.cls == labels.front()) {
        cells.push_back(region.lo);
        labels.push_back(classifier_.classify(region.lo.z));
      }
      split = best_information_gain_split(region, cells, labels, classifier_.num_classes());
      if (!split) throw InconsistencyError("witness cell did not yield a split");
    }

    const auto f = static_cast<size_t>(split->feature);
    const int slot = builder_.reserve();
    Region left = region;
    left.hi.z[f] = split->level;
    const int le = build(left);
    Region right = region;
    right.lo.z[f] = split->level + 1;
    const int gt = build(right);
    builder_.set_split(slot, split->feature,
                       classifier_.universe().threshold(split->feature, split->level), le, gt);
    return slot;
  }

  BornAgainTree finish() && { return std::move(builder_).finish(); }

 private:
  const CellClassifier& classifier_;
  const HeuristicConfig& config_;
  const HomogeneityOracle& oracle_;
  std::mt19937_64 rng_;
  TreeBuilder builder_;
};

}  // namespace

HomogeneityResult ExhaustiveHomogeneityOracle::check(const Region& region) const {
  if (region_cell_count(region, cell_cap_) > cell_cap_)
    throw CapacityError("region has more than " + std::to_string(cell_cap_) +
                        " cells; the exhaustive homogeneity oracle cannot certify it, use a "
                        "pluggable oracle or raise the cell cap");
  const int first = classifier_.classify(region.lo.z);
  std::optional<Witness> witness;
  for_each_cell(region, [&](std::span<const int> z) {
    const int k = classifier_.classify(z);
    if (k == first) return true;
    witness = Witness{Cell{{z.begin(), z.end()}}, k};
    return false;
  });
  if (witness) return *witness;
  return Homogeneous{first};
}

HomogeneityResult is_region_homogeneous(const Region& region, const CellClassifier& classifier,
                                        std::uint64_t cell_cap) {
  return ExhaustiveHomogeneityOracle(classifier, cell_cap).check(region);
}

std::vector<Cell> sample_region_cells(const Region& region, int count, std::mt19937_64& rng) {
  if (count < 1) throw InputError("cells per region must be at least 1");
  const size_t p = region.lo.z.size();
  std::vector<std::uniform_int_distribution<int>> coords;
  coords.reserve(p);
  for (size_t j = 0; j < p; ++j) coords.emplace_back(region.lo.z[j], region.hi.z[j]);
  std::vector<Cell> cells(static_cast<size_t>(count));
  for (Cell& c : cells) {
    c.z.resize(p);
    for (size_t j = 0; j < p; ++j) c.z[j] = coords[j](rng);
  }
  return cells;
}

std::optional<SplitChoice> best_information_gain_split(const Region& region,
                                                       std::span<const Cell> cells,
                                                       std::span<const int> labels,
                                                       int num_classes) {
  if (cells.size() != labels.size()) throw InputError("cells and labels differ in length");
  if (labels.empty()) return std::nullopt;
  bool mixed = false;
  for (int y : labels) mixed = mixed || y != labels.front();
  if (!mixed || region.is_single_cell()) return std::nullopt;

  const auto k = static_cast<size_t>(num_classes);
  const auto total = static_cast<std::uint64_t>(labels.size());
  std::vector<std::uint64_t> parent(k, 0);
  for (int y : labels) ++parent[static_cast<size_t>(y)];
  const double parent_entropy = entropy(parent, total);

  std::optional<SplitChoice> best;
  std::vector<std::uint64_t> left(k), right(k);
  for (size_t j = 0; j < region.lo.z.size(); ++j) {
    const int lo = region.lo.z[j];
    const int hi = region.hi.z[j];
    if (lo == hi) continue;
    // counts[(z - lo) * k + y]
    std::vector<std::uint64_t> counts(static_cast<size_t>(hi - lo + 1) * k, 0);
    for (size_t i = 0; i < cells.size(); ++i)
      ++counts[static_cast<size_t>(cells[i].z[j] - lo) * k + static_cast<size_t>(labels[i])];
    std::fill(left.begin(), left.end(), 0);
    std::uint64_t left_total = 0;
    for (int l = lo; l < hi; ++l) {
      for (size_t y = 0; y < k; ++y) {
        const auto c = counts[static_cast<size_t>(l - lo) * k + y];
        left[y] += c;
        left_total += c;
      }
      const std::uint64_t right_total = total - left_total;
      for (size_t y = 0; y < k; ++y) right[y] = parent[y] - left[y];
      const double children =
          (static_cast<double>(left_total) * entropy(left, left_total) +
           static_cast<double>(right_total) * entropy(right, right_total)) /
          static_cast<double>(total);
      const double gain = parent_entropy - children;
      if (!best || gain > best->gain + 1e-12)
        best = SplitChoice{static_cast<int>(j), l, gain};
    }
  }
  return best;
}

BornAgainTree heuristic_born_again(const CellClassifier& classifier, const HeuristicConfig& config,
                                   const HomogeneityOracle& oracle) {
  if (config.cells_per_region < 1) throw InputError("cells per region must be at least 1");
  HeuristicBuilder builder(classifier, config, oracle);
  builder.build(full_region(classifier.universe()));
  return std::move(builder).finish();
}

BornAgainTree heuristic_born_again(const Ensemble& ensemble, const HeuristicConfig& config) {
  if (config.oracle != HomogeneityOracleKind::kExhaustive)
    throw InputError("a pluggable homogeneity oracle must be passed explicitly");
  const SplitUniverse universe = extract_split_levels(ensemble);
  const CellClassifier classifier(ensemble, universe);
  const ExhaustiveHomogeneityOracle oracle(classifier, config.cell_cap);
  return heuristic_born_again(classifier, config, oracle);
}

}  // namespace bornagain

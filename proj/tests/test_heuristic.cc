#include <cmath>
#include <map>
#include <random>

#include "bornagain/cell_classifier.h"
#include "bornagain/error.h"
#include "bornagain/heuristic.h"
#include "bornagain/solver.h"
#include "bornagain/verify.h"
#include "doctest.h"
#include "support.h"

using namespace bornagain;

namespace {

// Gain recomputed from scratch for one candidate split.
double naive_gain(std::span<const Cell> cells, std::span<const int> labels, int k, size_t j,
                  int l) {
  auto h = [k](const std::vector<int>& ys) {
    if (ys.empty()) return 0.0;
    double e = 0.0;
    for (int c = 0; c < k; ++c) {
      const double q =
          static_cast<double>(std::count(ys.begin(), ys.end(), c)) / static_cast<double>(ys.size());
      if (q > 0) e -= q * std::log2(q);
    }
    return e;
  };
  std::vector<int> all(labels.begin(), labels.end()), left, right;
  for (size_t i = 0; i < cells.size(); ++i)
    (cells[i].z[j] <= l ? left : right).push_back(labels[i]);
  const double n = static_cast<double>(all.size());
  return h(all) - (static_cast<double>(left.size()) / n) * h(left) -
         (static_cast<double>(right.size()) / n) * h(right);
}

}  // namespace

TEST_CASE("region sampling") {
  std::mt19937_64 rng(1);
  const Region single{Cell{{2, 3}}, Cell{{2, 3}}};
  for (const Cell& c : sample_region_cells(single, 50, rng)) CHECK(c == single.lo);

  const Region r{Cell{{1, 2}}, Cell{{4, 3}}};
  std::mt19937_64 a(42), b(42);
  CHECK(sample_region_cells(r, 100, a) == sample_region_cells(r, 100, b));
  CHECK_THROWS_AS(sample_region_cells(r, 0, a), InputError);

  // 8 cells, 80000 draws: every count within 5 sigma of 10000.
  std::mt19937_64 rng2(7);
  std::map<std::vector<int>, int> counts;
  for (const Cell& c : sample_region_cells(r, 80000, rng2)) {
    CHECK(r.contains(c));
    ++counts[c.z];
  }
  CHECK(counts.size() == 8);
  const double sigma = std::sqrt(80000 * (1.0 / 8) * (7.0 / 8));
  for (const auto& [z, n] : counts) CHECK(std::abs(n - 10000) < 5 * sigma);
}

TEST_CASE("information gain split") {
  const Region r{Cell{{1, 1}}, Cell{{3, 3}}};
  std::vector<Cell> cells{Cell{{1, 1}}, Cell{{2, 3}}, Cell{{3, 2}}, Cell{{1, 3}}};
  SUBCASE("pure labels give no split") {
    const std::vector<int> labels{1, 1, 1, 1};
    CHECK_FALSE(best_information_gain_split(r, cells, labels, 2).has_value());
    const Region one{Cell{{1, 1}}, Cell{{1, 1}}};
    const std::vector<int> mixed{0, 1, 0, 1};
    CHECK_FALSE(best_information_gain_split(one, cells, mixed, 2).has_value());
  }
  SUBCASE("a perfect separator is chosen with full gain") {
    const std::vector<int> labels{0, 1, 1, 0};  // class 1 exactly where z0 >= 2
    const auto s = best_information_gain_split(r, cells, labels, 2);
    REQUIRE(s.has_value());
    CHECK(s->feature == 0);
    CHECK(s->level == 1);
    CHECK(s->gain == doctest::Approx(1.0));
  }
  SUBCASE("random labelings match the naive gain") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const Region box{Cell{{1, 1, 1}}, Cell{{4, 2, 5}}};
      const int k = 2 + trial % 2;
      const auto sample = sample_region_cells(box, 30, rng);
      std::vector<int> labels;
      for (size_t i = 0; i < sample.size(); ++i)
        labels.push_back(std::uniform_int_distribution<int>(0, k - 1)(rng));
      const auto s = best_information_gain_split(box, sample, labels, k);
      bool mixed = std::any_of(labels.begin(), labels.end(), [&](int y) { return y != labels[0]; });
      REQUIRE(s.has_value() == mixed);
      if (!s) continue;
      double best = -1;
      std::pair<size_t, int> arg{};
      for (size_t j = 0; j < 3; ++j)
        for (int l = box.lo.z[j]; l < box.hi.z[j]; ++l) {
          const double g = naive_gain(sample, labels, k, j, l);
          if (g > best + 1e-12) {
            best = g;
            arg = {j, l};
          }
        }
      CHECK(s->gain == doctest::Approx(best).epsilon(1e-9));
      CHECK(static_cast<size_t>(s->feature) == arg.first);
      CHECK(s->level == arg.second);
    }
  }
}

TEST_CASE("homogeneity oracle") {
  const Ensemble e = generate_tight_bound_ensemble(2);
  const SplitUniverse u = extract_split_levels(e);
  const CellClassifier c(e, u);
  const Region one{Cell{{2, 1}}, Cell{{2, 1}}};
  const auto h = is_region_homogeneous(one, c, 100);
  REQUIRE(std::holds_alternative<Homogeneous>(h));
  CHECK(std::get<Homogeneous>(h).cls == 1);

  const auto w = is_region_homogeneous(full_region(u), c, 100);
  REQUIRE(std::holds_alternative<Witness>(w));
  CHECK(c.classify(full_region(u).lo.z) == 0);
  CHECK(std::get<Witness>(w).cls == 1);
  CHECK(c.classify(std::get<Witness>(w).cell.z) == 1);

  CHECK_THROWS_AS(is_region_homogeneous(full_region(u), c, 3), CapacityError);
}

TEST_CASE("heuristic trees") {
  SUBCASE("homogeneous ensemble") {
    const Ensemble e({Tree::constant(2), Tree::stump(0, 1.0, 2, 2)}, {1, 1}, 1, 3);
    const BornAgainTree t = heuristic_born_again(e, {});
    CHECK(t.num_leaves() == 1);
  }
  SUBCASE("pluggable oracle must be supplied") {
    HeuristicConfig config;
    config.oracle = HomogeneityOracleKind::kPluggable;
    CHECK_THROWS_AS(heuristic_born_again(generate_tight_bound_ensemble(2), config), InputError);
  }
  SUBCASE("a single sampled cell still ends faithful") {
    // With one cell per region every label set is pure, so the oracle's
    // witnesses drive all splits.
    HeuristicConfig config;
    config.cells_per_region = 1;
    const Ensemble e = testing::random_ensemble(5);
    const BornAgainTree t = heuristic_born_again(e, config);
    CHECK(verify_faithfulness(t, e, extract_split_levels(e)).faithful);
  }
  SUBCASE("faithful, never better than optimal, deterministic") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Ensemble e = testing::random_ensemble(seed);
      HeuristicConfig config;
      config.seed = seed;
      config.cells_per_region = 50;
      const BornAgainTree t = heuristic_born_again(e, config);
      const SplitUniverse u = extract_split_levels(e);
      CHECK(verify_faithfulness(t, e, u).faithful);
      for (const auto& z : testing::all_cells(u)) {
        const auto x = testing::representative(u, z);
        CHECK(testing::oracle_tree_class(t.tree(), x) == testing::oracle_ensemble_class(e, x));
      }
      SolveConfig d;
      d.filter_hyperplanes = false;
      SolveConfig l = d;
      l.objective = Objective::kLeaves;
      CHECK(t.depth() >= solve(e, d).tree.depth());
      CHECK(t.num_leaves() >= solve(e, l).tree.num_leaves());
      CHECK(t == heuristic_born_again(e, config));
      CHECK(t.depth() <= [&] {
        int s = 0;
        for (int j = 0; j < u.num_features(); ++j) s += u.num_levels(j);
        return s;
      }());
    }
  }
}

TEST_CASE("custom oracle") {
  // Wraps the exhaustive oracle and counts calls.
  struct Counting final : HomogeneityOracle {
    explicit Counting(const CellClassifier& c) : inner(c, 1000) {}
    HomogeneityResult check(const Region& r) const override {
      ++calls;
      return inner.check(r);
    }
    ExhaustiveHomogeneityOracle inner;
    mutable int calls = 0;
  };
  const Ensemble e = generate_tight_bound_ensemble(3);
  const SplitUniverse u = extract_split_levels(e);
  const CellClassifier c(e, u);
  Counting oracle(c);
  HeuristicConfig config;
  config.oracle = HomogeneityOracleKind::kPluggable;
  const BornAgainTree t = heuristic_born_again(c, config, oracle);
  CHECK(oracle.calls >= t.num_leaves());
  CHECK(verify_faithfulness(t, e, u).faithful);
}

// Command-line front end: build, prune, heuristic, verify, stats, bench.
//
// Exit codes: 0 ok, 1 unfaithful tree, 2 capacity exceeded, 3 bad input.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bornagain/bench.h"
#include "bornagain/error.h"
#include "bornagain/heuristic.h"
#include "bornagain/io.h"
#include "bornagain/pruning.h"
#include "bornagain/solver.h"
#include "bornagain/verify.h"

namespace ba = bornagain;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnfaithful = 1;
constexpr int kExitCapacity = 2;
constexpr int kExitInput = 3;

constexpr const char* kCellCapEnv = "BORNAGAIN_CELL_CAP";

struct BuildArgs {
  std::string forest, out, samples, stats, dot;
  std::string objective = "D";
  bool prune = false, no_filter = false, verify = false;
  std::uint64_t cell_cap = ba::kDefaultFilterCellCap;
  std::uint64_t memo_cap = ba::kDefaultMaxMemoEntries;
  std::uint64_t dense_bytes = ba::kDefaultDenseMemoBytes;
};

struct PruneArgs {
  std::string tree, samples, out;
};

struct HeuristicArgs {
  std::string forest, out, homogeneity = "exhaustive";
  int cells = 1000;
  std::uint64_t seed = 0;
  std::uint64_t cell_cap = 10'000'000;
};

struct VerifyArgs {
  std::string forest, tree;
  std::uint64_t cell_cap = ba::kDefaultVerifyCellCap;
};

struct StatsArgs {
  std::string forest;
  std::uint64_t cell_cap = ba::kDefaultFilterCellCap;
};

struct BenchArgs {
  std::string manifest, csv;
  std::vector<std::string> objectives{"D"};
  bool no_prune = false;
  int folds = -1;
  std::uint64_t cell_cap = ba::kDefaultFilterCellCap;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    ba::write_text_file(path, text);
}

ba::Objective objective_or_throw(const std::string& name) {
  if (auto o = ba::parse_objective(name)) return *o;
  throw ba::InputError("unknown objective \"" + name + "\" (expected D, L or DL)");
}

int run_build(const BuildArgs& a) {
  if (a.prune && a.samples.empty()) throw ba::InputError("--prune requires --samples");
  const ba::Ensemble ensemble = ba::parse_forest(a.forest);
  ba::SolveConfig config;
  config.objective = objective_or_throw(a.objective);
  config.filter_hyperplanes = !a.no_filter;
  config.filter_cell_cap = a.cell_cap;
  config.max_memo_entries = a.memo_cap;
  config.dense_memo_bytes = a.dense_bytes;
  config.self_check = a.verify;
  const ba::SolveResult result = ba::solve(ensemble, config);

  ba::BornAgainTree tree = result.tree;
  if (a.prune) {
    const ba::SampleSet samples = ba::parse_samples(a.samples);
    samples.check_labels(ensemble.num_classes());
    tree = ba::post_prune(tree, samples);
  }
  emit(ba::tree_to_json(tree, a.objective), a.out);
  if (!a.dot.empty()) ba::write_text_file(a.dot, ba::tree_to_dot(tree, ensemble.class_names()));
  if (!a.stats.empty()) emit(ba::stats_to_json(result.stats), a.stats);
  std::fprintf(stderr, "depth %d, leaves %d, %d levels filtered%s, %.1f ms\n", tree.depth(),
               tree.num_leaves(), result.removed_levels,
               result.filter_skipped ? " (filter skipped: too many cells)" : "",
               result.stats.millis);
  if (result.faithful && !*result.faithful) {
    std::fprintf(stderr, "born-again tree is not faithful\n");
    return kExitUnfaithful;
  }
  return kExitOk;
}

int run_prune(const PruneArgs& a) {
  const ba::ParsedTree parsed = ba::parse_tree(a.tree);
  const ba::SampleSet samples = ba::parse_samples(a.samples);
  const ba::BornAgainTree pruned = ba::post_prune(parsed.tree, samples);
  emit(ba::tree_to_json(pruned, parsed.objective.empty() ? "D" : parsed.objective), a.out);
  std::fprintf(stderr, "leaves %d -> %d, depth %d -> %d\n", parsed.tree.num_leaves(),
               pruned.num_leaves(), parsed.tree.depth(), pruned.depth());
  return kExitOk;
}

int run_heuristic(const HeuristicArgs& a) {
  if (a.homogeneity != "exhaustive")
    throw ba::InputError("only the exhaustive homogeneity oracle is available from the CLI");
  const ba::Ensemble ensemble = ba::parse_forest(a.forest);
  ba::HeuristicConfig config;
  config.cells_per_region = a.cells;
  config.seed = a.seed;
  config.cell_cap = a.cell_cap;
  const ba::BornAgainTree tree = ba::heuristic_born_again(ensemble, config);
  emit(ba::tree_to_json(tree, ba::kHeuristicTag), a.out);
  std::fprintf(stderr, "depth %d, leaves %d\n", tree.depth(), tree.num_leaves());
  return kExitOk;
}

int run_verify(const VerifyArgs& a) {
  const ba::Ensemble ensemble = ba::parse_forest(a.forest);
  const ba::ParsedTree parsed = ba::parse_tree(a.tree);
  const ba::SplitUniverse universe = ba::extract_split_levels(ensemble);
  for (const ba::Node& nd : parsed.tree.tree().nodes()) {
    if (nd.is_leaf()) {
      if (nd.leaf_class >= ensemble.num_classes())
        throw ba::InputError("tree predicts class " + std::to_string(nd.leaf_class) +
                             " but the forest has " + std::to_string(ensemble.num_classes()));
      continue;
    }
    if (nd.feature >= ensemble.num_features() || !universe.level_of(nd.feature, nd.threshold)) {
      // A split the ensemble never makes cannot be checked cell by cell.
      throw ba::InputError("tree split x" + std::to_string(nd.feature) + " <= " +
                           std::to_string(nd.threshold) + " is not a forest split level");
    }
  }
  const ba::VerificationReport report =
      ba::verify_faithfulness(parsed.tree, ensemble, universe, a.cell_cap);
  std::cout << ba::report_to_json(report);
  return report.faithful ? kExitOk : kExitUnfaithful;
}

int run_stats(const StatsArgs& a) {
  const ba::Ensemble ensemble = ba::parse_forest(a.forest);
  const ba::SplitUniverse universe = ba::extract_split_levels(ensemble);
  int leaves = 0, depth = 0;
  for (const ba::Tree& t : ensemble.trees()) {
    leaves += t.num_leaves();
    depth = std::max(depth, t.depth());
  }
  std::cout << "features " << ensemble.num_features() << ", classes " << ensemble.num_classes()
            << ", trees " << ensemble.trees().size() << ", leaves " << leaves << ", max depth "
            << depth << "\n";
  std::cout << "levels per feature:";
  for (int j = 0; j < universe.num_features(); ++j) std::cout << " " << universe.num_levels(j);
  std::cout << "\ncells " << ba::count_cells(universe) << "\nregions "
            << ba::count_regions(universe) << "\n";
  const ba::FilterResult filtered = ba::filter_redundant_hyperplanes(ensemble, universe, a.cell_cap);
  if (filtered.skipped) {
    std::cout << "filtering skipped (more than " << a.cell_cap << " cells)\n";
  } else {
    std::cout << "after filtering: " << filtered.removed_levels << " levels removed, cells "
              << ba::count_cells(filtered.universe) << ", regions "
              << ba::count_regions(filtered.universe) << "\n";
  }
  return kExitOk;
}

int run_bench_cmd(const BenchArgs& a) {
  ba::BenchConfig config;
  config.manifest = a.manifest;
  config.objectives.clear();
  for (const auto& o : a.objectives) config.objectives.push_back(objective_or_throw(o));
  config.prune = !a.no_prune;
  if (a.folds >= 0) config.max_folds = a.folds;
  config.solve.filter_cell_cap = a.cell_cap;
  const ba::BenchReport report = ba::run_bench(config);
  for (const auto& f : report.folds)
    if (!f.error.empty())
      std::fprintf(stderr, "fold %d %s failed: %s\n", f.fold, f.method.c_str(), f.error.c_str());
  std::cout << ba::bench_to_table(report.rows);
  if (!a.csv.empty()) emit(ba::bench_to_csv(report.rows), a.csv);
  for (const auto& r : report.rows)
    if (r.failed) return kExitCapacity;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Born-again decision trees for tree ensembles"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build an optimal born-again tree from a forest");
  b->add_option("forest", build.forest, "Forest JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--objective,-O", build.objective, "D, L or DL")
      ->check(CLI::IsMember({"D", "L", "DL"}));
  b->add_option("--out,-o", build.out, "Output tree JSON (default stdout)");
  b->add_flag("--prune", build.prune, "Post-prune with --samples");
  b->add_option("--samples", build.samples, "Training samples CSV")->check(CLI::ExistingFile);
  b->add_option("--stats", build.stats, "Write solver statistics JSON ('-' for stdout)");
  b->add_option("--dot", build.dot, "Write a Graphviz rendering");
  b->add_flag("--no-filter", build.no_filter, "Keep redundant split levels");
  b->add_flag("--verify", build.verify, "Check faithfulness on every cell");
  b->add_option("--cell-cap", build.cell_cap, "Largest universe scanned by filtering")
      ->envname(kCellCapEnv);
  b->add_option("--memo-cap", build.memo_cap, "Largest number of hashed memo entries");
  b->add_option("--dense-memo-bytes", build.dense_bytes,
                "Memory allowed for a dense per-region memo (0 disables it)");

  PruneArgs prune;
  auto* p = app.add_subcommand("prune", "Post-prune a tree with training samples");
  p->add_option("tree", prune.tree, "Tree JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--samples", prune.samples, "Training samples CSV")
      ->required()
      ->check(CLI::ExistingFile);
  p->add_option("--out,-o", prune.out, "Output tree JSON (default stdout)");

  HeuristicArgs heur;
  auto* h = app.add_subcommand("heuristic", "Build a faithful tree by sampled information gain");
  h->add_option("forest", heur.forest, "Forest JSON")->required()->check(CLI::ExistingFile);
  h->add_option("--cells", heur.cells, "Cells sampled per region")->check(CLI::PositiveNumber);
  h->add_option("--seed", heur.seed, "Random seed");
  h->add_option("--homogeneity", heur.homogeneity, "Homogeneity oracle")
      ->check(CLI::IsMember({"exhaustive"}));
  h->add_option("--cell-cap", heur.cell_cap, "Largest region the oracle scans")
      ->envname(kCellCapEnv);
  h->add_option("--out,-o", heur.out, "Output tree JSON (default stdout)");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Check a tree against a forest on every cell");
  v->add_option("forest", ver.forest, "Forest JSON")->required()->check(CLI::ExistingFile);
  v->add_option("tree", ver.tree, "Tree JSON")->required()->check(CLI::ExistingFile);
  v->add_option("--cell-cap", ver.cell_cap, "Largest universe scanned")->envname(kCellCapEnv);

  StatsArgs st;
  auto* s = app.add_subcommand("stats", "Describe a forest's split levels and cell space");
  s->add_option("forest", st.forest, "Forest JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--cell-cap", st.cell_cap, "Largest universe scanned by filtering")
      ->envname(kCellCapEnv);

  BenchArgs bench;
  auto* bn = app.add_subcommand("bench", "Cross-validation table over fixture folds");
  bn->add_option("manifest", bench.manifest, "Fixture manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);
  bn->add_option("--objective,-O", bench.objectives, "Objectives to run")
      ->check(CLI::IsMember({"D", "L", "DL"}));
  bn->add_flag("--no-prune", bench.no_prune, "Skip post-pruned rows");
  bn->add_option("--folds", bench.folds, "Run only the first N folds");
  bn->add_option("--csv", bench.csv, "Write the table as CSV ('-' for stdout)");
  bn->add_option("--cell-cap", bench.cell_cap, "Largest universe scanned by filtering")
      ->envname(kCellCapEnv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*b) return run_build(build);
    if (*p) return run_prune(prune);
    if (*h) return run_heuristic(heur);
    if (*v) return run_verify(ver);
    if (*s) return run_stats(st);
    if (*bn) return run_bench_cmd(bench);
  } catch (const ba::CapacityError& e) {
    std::fprintf(stderr, "capacity: %s\n", e.what());
    return kExitCapacity;
  } catch (const ba::InputError& e) {
    std::fprintf(stderr, "input: %s\n", e.what());
    return kExitInput;
  } catch (const ba::InconsistencyError& e) {
    std::fprintf(stderr, "inconsistency: %s\n", e.what());
    return kExitUnfaithful;
  }
  return kExitOk;
}

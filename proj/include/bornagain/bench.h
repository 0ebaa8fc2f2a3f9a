#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bornagain/samples.h"
#include "bornagain/solver.h"
#include "bornagain/verify.h"

namespace bornagain {

struct FoldFiles {
  int fold = 0;
  std::filesystem::path forest;
  std::filesystem::path train;
  std::filesystem::path test;
  int trees = 0;
  int leaves = 0;
};

struct Manifest {
  std::string dataset;
  int p = 0;
  int num_classes = 0;
  std::vector<FoldFiles> folds;
};

// Paths in the manifest are relative to its directory.
Manifest load_manifest(const std::filesystem::path& path);

struct BenchConfig {
  std::filesystem::path manifest;
  std::vector<Objective> objectives{Objective::kDepth};
  bool prune = true;
  std::optional<int> max_folds;
  SolveConfig solve;  // objective is overridden per run
};

// One method on one fold. `method` is "RF", "BA-<obj>" or "BA-<obj>-P".
struct FoldResult {
  int fold = 0;
  std::string method;
  Metrics metrics;
  double millis = 0.0;
  std::string error;  // nonempty when the fold failed
};

struct BenchRow {
  std::string dataset;
  std::string method;
  int folds = 0;
  int failed = 0;
  double depth_avg = 0, leaves_avg = 0;
  int depth_min = 0, depth_max = 0, leaves_min = 0, leaves_max = 0;
  double accuracy = 0, f1 = 0, millis = 0;
};

struct BenchReport {
  std::vector<FoldResult> folds;  // ordered by fold, then method
  std::vector<BenchRow> rows;
};

BenchReport run_bench(const BenchConfig& config);
std::vector<BenchRow> aggregate(const std::string& dataset, const std::vector<FoldResult>& folds);

std::string bench_to_csv(const std::vector<BenchRow>& rows);
std::string bench_to_table(const std::vector<BenchRow>& rows);

}  // namespace bornagain

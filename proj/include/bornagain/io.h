#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "bornagain/born_again_tree.h"
#include "bornagain/forest.h"
#include "bornagain/samples.h"
#include "bornagain/solver.h"
#include "bornagain/verify.h"

namespace bornagain {

// Forest interchange format:
//   { "p": int, "K": int, "classes": [names], "trees": [{"weight": w, "root": node}] }
//   node = {"feature": j, "threshold": x, "le": node, "gt": node} | {"leaf": k}
// "le" is taken when x_j <= threshold. "classes" is optional; any other field
// is rejected.
Ensemble parse_forest_json(std::string_view text);
Ensemble parse_forest(const std::filesystem::path& path);
std::string forest_to_json(const Ensemble& ensemble);
void write_forest(const Ensemble& ensemble, const std::filesystem::path& path);

// Tree output: { "objective": "D|L|DL|H", "depth": d, "leaves": n, "root": node }
// with the node grammar above. "H" marks heuristic trees.
inline constexpr std::string_view kHeuristicTag = "H";
std::string tree_to_json(const BornAgainTree& tree, std::string_view objective);
void write_tree(const BornAgainTree& tree, std::string_view objective,
                const std::filesystem::path& path);
struct ParsedTree {
  BornAgainTree tree;
  std::string objective;
};
ParsedTree parse_tree_json(std::string_view text);
ParsedTree parse_tree(const std::filesystem::path& path);

std::string tree_to_dot(const BornAgainTree& tree, const std::vector<std::string>& class_names = {});

// Samples CSV: a header row naming p feature columns followed by "class",
// then one numeric row per sample with a nonnegative integer class.
SampleSet parse_samples_csv(std::string_view text, std::string_view source = "<memory>");
SampleSet parse_samples(const std::filesystem::path& path);
std::string samples_to_csv(const SampleSet& samples);

std::string stats_to_json(const SolverStats& stats);
std::string report_to_json(const VerificationReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace bornagain

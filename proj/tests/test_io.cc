#include <filesystem>

#include "bornagain/bench.h"
#include "bornagain/error.h"
#include "bornagain/io.h"
#include "bornagain/solver.h"
#include "doctest.h"
#include "support.h"

using namespace bornagain;
namespace fs = std::filesystem;

namespace {

std::string forest_text(const std::string& node, const std::string& extra = "") {
  return R"({"p": 2, "K": 2, "trees": [{"weight": 1, "root": )" + node + "}]" + extra + "}";
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bornagain_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("forest round trip") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Ensemble e = testing::random_ensemble(seed);
    const std::string text = forest_to_json(e);
    const Ensemble back = parse_forest_json(text);
    CHECK(back == e);
    CHECK(forest_to_json(back) == text);
  }
  const Ensemble named({Tree::stump(0, 0.1, 0, 1)}, {0.3}, 1, 2, {"no", "yes"});
  CHECK(parse_forest_json(forest_to_json(named)) == named);
}

TEST_CASE("forest validation") {
  const std::string leaf = R"({"leaf": 0})";
  CHECK_NOTHROW(parse_forest_json(forest_text(leaf)));
  CHECK(error_of([&] { parse_forest_json("{"); }).find("malformed JSON") != std::string::npos);
  CHECK(error_of([&] {
          parse_forest_json(forest_text(R"({"feature": 2, "threshold": 0, "le": {"leaf": 0}, "gt": {"leaf": 1}})"));
        }).find("feature") != std::string::npos);
  CHECK(error_of([&] { parse_forest_json(forest_text(leaf, R"(, "extra": 1)")); })
            .find("unknown field \"extra\"") != std::string::npos);
  CHECK(error_of([&] {
          parse_forest_json(forest_text(R"({"feature": 0, "threshold": 0, "le": {"leaf": 0}, "gt": {"lea": 1}})"));
        }).find("forest.trees[0].root.gt") != std::string::npos);
  CHECK(error_of([&] { parse_forest_json(forest_text(R"({"leaf": 2})")); }).find("class") !=
        std::string::npos);
  CHECK(error_of([&] { parse_forest_json(forest_text(R"({"leaf": -1})")); }).find("leaf") !=
        std::string::npos);
  CHECK(error_of([&] {
          parse_forest_json(R"({"p": 2, "K": 2, "trees": [{"weight": "x", "root": {"leaf": 0}}]})");
        }).find("weight") != std::string::npos);
  CHECK(error_of([&] { parse_forest_json(R"({"p": 2, "trees": []})"); }).find("\"K\"") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_forest("/nonexistent/forest.json"), InputError);
}

TEST_CASE("tree round trip and validation") {
  const Ensemble e = testing::random_ensemble(12);
  const SolveResult r = solve(e, {});
  const std::string text = tree_to_json(r.tree, "D");
  const ParsedTree back = parse_tree_json(text);
  CHECK(back.tree == r.tree);
  CHECK(back.objective == "D");
  CHECK(tree_to_json(back.tree, back.objective) == text);
  CHECK(parse_tree_json(tree_to_json(r.tree, kHeuristicTag)).objective == "H");
  CHECK_THROWS_AS(parse_tree_json(R"({"objective": "Q", "root": {"leaf": 0}})"), InputError);
  CHECK_THROWS_AS(parse_tree_json(R"({"depth": 1, "root": {"leaf": 0}})"), InputError);
  CHECK_THROWS_AS(parse_tree_json(R"({"leaves": 2, "root": {"leaf": 0}})"), InputError);

  const fs::path dir = scratch_dir("tree");
  write_tree(r.tree, "DL", dir / "t.json");
  CHECK(parse_tree(dir / "t.json").tree == r.tree);
  const std::string dot = tree_to_dot(r.tree, {"a", "b", "c"});
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("->") != std::string::npos);
}

TEST_CASE("samples csv") {
  const SampleSet s = parse_samples_csv("x0,x1,class\n1,2.5,0\n-3,1e-3,1\n\n");
  REQUIRE(s.size() == 2);
  CHECK(s.row(1)[1] == 1e-3);
  CHECK(s.label(1) == 1);
  CHECK(parse_samples_csv(samples_to_csv(s)) == s);

  const Ensemble e = testing::random_ensemble(2);
  const SampleSet r = testing::random_samples(e, 100, 3);
  CHECK(parse_samples_csv(samples_to_csv(r)) == r);

  CHECK(error_of([] { parse_samples_csv("x0,class\n1,0\n1,2,0\n", "f.csv"); })
            .find("f.csv:3") != std::string::npos);
  CHECK(error_of([] { parse_samples_csv("x0,class\nabc,0\n", "f.csv"); }).find("f.csv:2: column 1") !=
        std::string::npos);
  CHECK(error_of([] { parse_samples_csv("x0,class\n1,-1\n", "f.csv"); }).find("column 2") !=
        std::string::npos);
  CHECK(error_of([] { parse_samples_csv("x0,y\n"); }).find("header") != std::string::npos);
  CHECK(error_of([] { parse_samples_csv(""); }).find("header") != std::string::npos);
  CHECK_THROWS_AS(s.check_labels(1), InputError);
}

TEST_CASE("stats and report json") {
  SolverStats st;
  st.recursions = 5;
  CHECK(stats_to_json(st).find("\"recursions\":5") != std::string::npos);
  VerificationReport rep;
  rep.faithful = false;
  rep.counterexample = Cell{{1, 2}};
  CHECK(report_to_json(rep).find("[1,2]") != std::string::npos);
}

TEST_CASE("fixture forests match their manifest") {
  const Manifest m = load_manifest(fs::path(BORNAGAIN_FIXTURE_DIR) / "breast_cancer/manifest.json");
  CHECK(m.dataset == "BC");
  CHECK(m.folds.size() == 10);
  for (const FoldFiles& f : m.folds) {
    const Ensemble e = parse_forest(f.forest);
    int leaves = 0;
    for (const Tree& t : e.trees()) {
      leaves += t.num_leaves();
      CHECK(t.num_leaves() <= 8);
    }
    CHECK(static_cast<int>(e.trees().size()) == f.trees);
    CHECK(leaves == f.leaves);
    CHECK(e.num_features() == m.p);
    CHECK(e.num_classes() == m.num_classes);
    const SampleSet train = parse_samples(f.train);
    const SampleSet test = parse_samples(f.test);
    CHECK(train.size() + test.size() == 683);
  }
}

TEST_CASE("bench on a synthetic manifest") {
  const fs::path dir = scratch_dir("bench");
  std::string folds;
  for (int k = 0; k < 3; ++k) {
    const Ensemble e = testing::random_ensemble(static_cast<std::uint64_t>(40 + k));
    const std::string name = "f" + std::to_string(k);
    write_forest(e, dir / (name + ".json"));
    write_text_file(dir / (name + ".train.csv"), samples_to_csv(testing::random_samples(e, 30, k)));
    write_text_file(dir / (name + ".test.csv"),
                    samples_to_csv(testing::random_samples(e, 30, k + 100)));
    if (k) folds += ",";
    folds += R"({"fold": )" + std::to_string(k) + R"(, "forest": ")" + name + R"(.json", "train": ")" +
             name + R"(.train.csv", "test": ")" + name + R"(.test.csv"})";
  }
  // Random ensembles have varying p; bench does not require a common one.
  write_text_file(dir / "manifest.json",
                  R"({"dataset": "SYN", "p": 0, "K": 0, "folds": [)" + folds + "]}");

  BenchConfig config;
  config.manifest = dir / "manifest.json";
  config.objectives = {Objective::kDepth, Objective::kLeaves};
  const BenchReport a = run_bench(config);
  const BenchReport b = run_bench(config);
  CHECK(bench_to_csv(a.rows).size() > 0);
  REQUIRE(a.rows.size() == 5);  // RF, BA-D, BA-D-P, BA-L, BA-L-P
  CHECK(a.rows[0].method == "RF");
  for (const BenchRow& r : a.rows) {
    CHECK(r.folds == 3);
    CHECK(r.failed == 0);
  }
  // Labels come from the ensemble itself, so everything faithful scores 1.
  CHECK(a.rows[0].accuracy == 1.0);
  CHECK(a.rows[1].accuracy == a.rows[0].accuracy);
  CHECK(a.rows[1].f1 == a.rows[0].f1);
  CHECK(a.rows[2].leaves_avg <= a.rows[1].leaves_avg);
  // Deterministic apart from timing.
  for (size_t i = 0; i < a.folds.size(); ++i) {
    CHECK(a.folds[i].method == b.folds[i].method);
    CHECK(a.folds[i].metrics.depth == b.folds[i].metrics.depth);
    CHECK(a.folds[i].metrics.leaves == b.folds[i].metrics.leaves);
    CHECK(a.folds[i].metrics.accuracy == b.folds[i].metrics.accuracy);
  }
  CHECK(bench_to_table(a.rows).find("BA-L-P") != std::string::npos);

  SUBCASE("a broken fold is flagged, not fatal") {
    write_text_file(dir / "f1.json", "{");
    const BenchReport c = run_bench(config);
    CHECK(c.rows[0].failed == 1);
    CHECK(c.rows[0].folds == 2);
  }
}

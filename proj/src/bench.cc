#include "bornagain/bench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "bornagain/error.h"
#include "bornagain/io.h"
#include "bornagain/pruning.h"
#include "json.hpp"

namespace bornagain {
namespace {

using Json = nlohmann::json;

const Json& field(const Json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name))
    throw InputError(where + ": missing field \"" + name + "\"");
  return obj[name];
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  const auto dir = path.parent_path();
  Manifest m;
  try {
    m.dataset = field(doc, "dataset", where).get<std::string>();
    m.p = field(doc, "p", where).get<int>();
    m.num_classes = field(doc, "K", where).get<int>();
    const Json& folds = field(doc, "folds", where);
    for (size_t i = 0; i < folds.size(); ++i) {
      const std::string at = where + ": folds[" + std::to_string(i) + "]";
      const Json& f = folds[i];
      FoldFiles ff;
      ff.fold = field(f, "fold", at).get<int>();
      ff.forest = dir / field(f, "forest", at).get<std::string>();
      ff.train = dir / field(f, "train", at).get<std::string>();
      ff.test = dir / field(f, "test", at).get<std::string>();
      ff.trees = f.value("trees", 0);
      ff.leaves = f.value("leaves", 0);
      m.folds.push_back(std::move(ff));
    }
  } catch (const Json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
  std::sort(m.folds.begin(), m.folds.end(),
            [](const FoldFiles& a, const FoldFiles& b) { return a.fold < b.fold; });
  return m;
}

BenchReport run_bench(const BenchConfig& config) {
  const Manifest manifest = load_manifest(config.manifest);
  BenchReport report;
  size_t n = manifest.folds.size();
  if (config.max_folds) n = std::min(n, static_cast<size_t>(std::max(0, *config.max_folds)));

  for (size_t i = 0; i < n; ++i) {
    const FoldFiles& ff = manifest.folds[i];
    auto fail_all = [&](const std::string& msg) {
      report.folds.push_back({ff.fold, "RF", {}, 0.0, msg});
      for (Objective obj : config.objectives) {
        const std::string name = "BA-" + std::string(objective_name(obj));
        report.folds.push_back({ff.fold, name, {}, 0.0, msg});
        if (config.prune) report.folds.push_back({ff.fold, name + "-P", {}, 0.0, msg});
      }
    };
    std::optional<Ensemble> ensemble;
    SampleSet train, test;
    try {
      ensemble = parse_forest(ff.forest);
      train = parse_samples(ff.train);
      test = parse_samples(ff.test);
      test.check_labels(ensemble->num_classes());
    } catch (const Error& e) {
      fail_all(e.what());
      continue;
    }
    report.folds.push_back({ff.fold, "RF", compute_metrics(*ensemble, test), 0.0, {}});

    for (Objective obj : config.objectives) {
      const std::string name = "BA-" + std::string(objective_name(obj));
      SolveConfig sc = config.solve;
      sc.objective = obj;
      try {
        const auto start = std::chrono::steady_clock::now();
        const SolveResult result = solve(*ensemble, sc);
        const double millis =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        report.folds.push_back({ff.fold, name,
                                compute_metrics(result.tree, test, ensemble->num_classes()),
                                millis, {}});
        if (config.prune) {
          const BornAgainTree pruned = post_prune(result.tree, train);
          report.folds.push_back({ff.fold, name + "-P",
                                  compute_metrics(pruned, test, ensemble->num_classes()), millis,
                                  {}});
        }
      } catch (const Error& e) {
        report.folds.push_back({ff.fold, name, {}, 0.0, e.what()});
        if (config.prune) report.folds.push_back({ff.fold, name + "-P", {}, 0.0, e.what()});
      }
    }
  }
  report.rows = aggregate(manifest.dataset, report.folds);
  return report;
}

std::vector<BenchRow> aggregate(const std::string& dataset, const std::vector<FoldResult>& folds) {
  std::vector<BenchRow> rows;
  std::map<std::string, size_t> index;
  for (const FoldResult& f : folds) {
    auto [it, inserted] = index.emplace(f.method, rows.size());
    if (inserted) rows.push_back(BenchRow{dataset, f.method});
    BenchRow& r = rows[it->second];
    if (!f.error.empty()) {
      ++r.failed;
      continue;
    }
    const Metrics& m = f.metrics;
    if (r.folds == 0) {
      r.depth_min = r.depth_max = m.depth;
      r.leaves_min = r.leaves_max = m.leaves;
    }
    ++r.folds;
    r.depth_min = std::min(r.depth_min, m.depth);
    r.depth_max = std::max(r.depth_max, m.depth);
    r.leaves_min = std::min(r.leaves_min, m.leaves);
    r.leaves_max = std::max(r.leaves_max, m.leaves);
    r.depth_avg += m.depth;
    r.leaves_avg += m.leaves;
    r.accuracy += m.accuracy;
    r.f1 += m.f1;
    r.millis += f.millis;
  }
  for (BenchRow& r : rows) {
    if (r.folds == 0) continue;
    const double n = r.folds;
    r.depth_avg /= n;
    r.leaves_avg /= n;
    r.accuracy /= n;
    r.f1 /= n;
    r.millis /= n;
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "dataset,method,folds,failed,depth_avg,depth_min,depth_max,leaves_avg,leaves_min,"
      "leaves_max,accuracy,f1,millis\n";
  for (const BenchRow& r : rows) {
    out += r.dataset + "," + r.method + "," + std::to_string(r.folds) + "," +
           std::to_string(r.failed) + "," + fmt("%.4f", r.depth_avg) + "," +
           std::to_string(r.depth_min) + "," + std::to_string(r.depth_max) + "," +
           fmt("%.4f", r.leaves_avg) + "," + std::to_string(r.leaves_min) + "," +
           std::to_string(r.leaves_max) + "," + fmt("%.6f", r.accuracy) + "," +
           fmt("%.6f", r.f1) + "," + fmt("%.1f", r.millis) + "\n";
  }
  return out;
}

std::string bench_to_table(const std::vector<BenchRow>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-8s %-10s %5s %18s %24s %8s %8s %10s\n", "dataset",
                "method", "folds", "depth avg[min,max]", "leaves avg[min,max]", "acc", "f1",
                "ms");
  out += line;
  for (const BenchRow& r : rows) {
    const std::string depth = fmt("%.2f", r.depth_avg) + " [" + std::to_string(r.depth_min) +
                              "," + std::to_string(r.depth_max) + "]";
    const std::string leaves = fmt("%.2f", r.leaves_avg) + " [" + std::to_string(r.leaves_min) +
                               "," + std::to_string(r.leaves_max) + "]";
    std::string folds = std::to_string(r.folds);
    if (r.failed) folds += "!" + std::to_string(r.failed);
    std::snprintf(line, sizeof(line), "%-8s %-10s %5s %18s %24s %8.4f %8.4f %10.1f\n",
                  r.dataset.c_str(), r.method.c_str(), folds.c_str(), depth.c_str(),
                  leaves.c_str(), r.accuracy, r.f1, r.millis);
    out += line;
  }
  return out;
}

}  // namespace bornagain

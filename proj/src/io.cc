#include "bornagain/io.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bornagain/error.h"
#include "json.hpp"

namespace bornagain {
namespace {

using Json = nlohmann::ordered_json;

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

void expect_fields(const Json& obj, const std::string& where,
                   std::initializer_list<std::string_view> required,
                   std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  for (auto name : required)
    if (!obj.contains(std::string(name)))
      throw InputError(where + ": missing field \"" + std::string(name) + "\"");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto name : required) known = known || key == name;
    for (auto name : optional) known = known || key == name;
    if (!known) throw InputError(where + ": unknown field \"" + key + "\"");
  }
}

int as_index(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw InputError(where + ": expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < 0 || i > std::numeric_limits<int>::max())
    throw InputError(where + ": expected a nonnegative integer");
  return static_cast<int>(i);
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

// Appends the subtree in pre-order and returns its index.
int parse_node(const Json& j, const std::string& where, std::vector<Node>& nodes) {
  if (!j.is_object()) throw InputError(where + ": expected a node object");
  if (j.contains("leaf")) {
    expect_fields(j, where, {"leaf"});
    nodes.push_back(Node::leaf(as_index(j["leaf"], where + ".leaf")));
    return static_cast<int>(nodes.size()) - 1;
  }
  expect_fields(j, where, {"feature", "threshold", "le", "gt"});
  const int slot = static_cast<int>(nodes.size());
  nodes.push_back(Node::leaf(0));
  const int feature = as_index(j["feature"], where + ".feature");
  const double threshold = as_number(j["threshold"], where + ".threshold");
  const int le = parse_node(j["le"], where + ".le", nodes);
  const int gt = parse_node(j["gt"], where + ".gt", nodes);
  nodes[static_cast<size_t>(slot)] = Node::split(feature, threshold, le, gt);
  return slot;
}

Tree parse_tree_root(const Json& j, const std::string& where) {
  std::vector<Node> nodes;
  parse_node(j, where, nodes);
  try {
    return Tree(std::move(nodes), 0);
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

Json node_to_json(const Tree& tree, int i) {
  const Node& nd = tree.node(i);
  Json out;
  if (nd.is_leaf()) {
    out["leaf"] = nd.leaf_class;
    return out;
  }
  out["feature"] = nd.feature;
  out["threshold"] = nd.threshold;
  out["le"] = node_to_json(tree, nd.le);
  out["gt"] = node_to_json(tree, nd.gt);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

// ---------------------------------------------------------------- files

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

// ---------------------------------------------------------------- forests

Ensemble parse_forest_json(std::string_view text) {
  const Json doc = parse_json(text);
  expect_fields(doc, "forest", {"p", "K", "trees"}, {"classes"});
  const int p = as_index(doc["p"], "forest.p");
  const int k = as_index(doc["K"], "forest.K");
  std::vector<std::string> names;
  if (doc.contains("classes")) {
    if (!doc["classes"].is_array()) throw InputError("forest.classes: expected an array");
    for (const auto& n : doc["classes"]) {
      if (!n.is_string()) throw InputError("forest.classes: expected strings");
      names.push_back(n.get<std::string>());
    }
  }
  if (!doc["trees"].is_array()) throw InputError("forest.trees: expected an array");
  std::vector<Tree> trees;
  std::vector<double> weights;
  for (size_t t = 0; t < doc["trees"].size(); ++t) {
    const std::string where = "forest.trees[" + std::to_string(t) + "]";
    const Json& entry = doc["trees"][t];
    expect_fields(entry, where, {"weight", "root"});
    weights.push_back(as_number(entry["weight"], where + ".weight"));
    trees.push_back(parse_tree_root(entry["root"], where + ".root"));
  }
  return Ensemble(std::move(trees), std::move(weights), p, k, std::move(names));
}

Ensemble parse_forest(const std::filesystem::path& path) {
  try {
    return parse_forest_json(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string forest_to_json(const Ensemble& ensemble) {
  Json doc;
  doc["p"] = ensemble.num_features();
  doc["K"] = ensemble.num_classes();
  if (!ensemble.class_names().empty()) doc["classes"] = ensemble.class_names();
  doc["trees"] = Json::array();
  for (size_t t = 0; t < ensemble.trees().size(); ++t) {
    Json entry;
    const double w = ensemble.weights()[t];
    if (w == std::floor(w) && std::abs(w) < 1e15)
      entry["weight"] = static_cast<std::int64_t>(w);
    else
      entry["weight"] = w;
    entry["root"] = node_to_json(ensemble.trees()[t], ensemble.trees()[t].root());
    doc["trees"].push_back(std::move(entry));
  }
  return doc.dump(1) + "\n";
}

void write_forest(const Ensemble& ensemble, const std::filesystem::path& path) {
  write_text_file(path, forest_to_json(ensemble));
}

// ---------------------------------------------------------------- trees

std::string tree_to_json(const BornAgainTree& tree, std::string_view objective) {
  Json doc;
  doc["objective"] = std::string(objective);
  doc["depth"] = tree.depth();
  doc["leaves"] = tree.num_leaves();
  doc["root"] = node_to_json(tree.tree(), tree.tree().root());
  return doc.dump(1) + "\n";
}

void write_tree(const BornAgainTree& tree, std::string_view objective,
                const std::filesystem::path& path) {
  write_text_file(path, tree_to_json(tree, objective));
}

ParsedTree parse_tree_json(std::string_view text) {
  const Json doc = parse_json(text);
  expect_fields(doc, "tree", {"root"}, {"objective", "depth", "leaves"});
  std::string objective;
  if (doc.contains("objective")) {
    if (!doc["objective"].is_string()) throw InputError("tree.objective: expected a string");
    objective = doc["objective"].get<std::string>();
    if (!parse_objective(objective) && objective != kHeuristicTag)
      throw InputError("tree.objective: expected one of D, L, DL, H");
  }
  BornAgainTree tree(parse_tree_root(doc["root"], "tree.root"));
  if (doc.contains("depth") && as_index(doc["depth"], "tree.depth") != tree.depth())
    throw InputError("tree.depth does not match the tree");
  if (doc.contains("leaves") && as_index(doc["leaves"], "tree.leaves") != tree.num_leaves())
    throw InputError("tree.leaves does not match the tree");
  return {std::move(tree), std::move(objective)};
}

ParsedTree parse_tree(const std::filesystem::path& path) {
  try {
    return parse_tree_json(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string tree_to_dot(const BornAgainTree& tree, const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << "digraph born_again {\n  node [shape=box, fontname=\"Helvetica\"];\n";
  const Tree& t = tree.tree();
  for (size_t i = 0; i < t.nodes().size(); ++i) {
    const Node& nd = t.node(static_cast<int>(i));
    out << "  n" << i << " [label=\"";
    if (nd.is_leaf()) {
      if (static_cast<size_t>(nd.leaf_class) < class_names.size())
        out << class_names[static_cast<size_t>(nd.leaf_class)];
      else
        out << "class " << nd.leaf_class;
      out << "\", style=rounded];\n";
    } else {
      out << "x" << nd.feature << " <= " << format_double(nd.threshold) << "\"];\n";
    }
  }
  for (size_t i = 0; i < t.nodes().size(); ++i) {
    const Node& nd = t.node(static_cast<int>(i));
    if (nd.is_leaf()) continue;
    out << "  n" << i << " -> n" << nd.le << " [label=\"yes\"];\n";
    out << "  n" << i << " -> n" << nd.gt << " [label=\"no\"];\n";
  }
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------- samples

SampleSet parse_samples_csv(std::string_view text, std::string_view source) {
  const std::string src(source);
  size_t line_no = 0;
  size_t pos = 0;
  std::optional<SampleSet> samples;
  std::vector<double> row;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = src + ":" + std::to_string(line_no);
    if (!samples) {
      if (fields.size() < 2 || fields.back() != "class")
        throw InputError(where + ": header must list feature columns followed by \"class\"");
      samples.emplace(static_cast<int>(fields.size()) - 1);
      row.resize(fields.size() - 1);
      continue;
    }
    if (fields.size() != row.size() + 1)
      throw InputError(where + ": expected " + std::to_string(row.size() + 1) + " fields, found " +
                       std::to_string(fields.size()));
    for (size_t c = 0; c < row.size(); ++c) {
      const auto f = fields[c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(row[c]))
        throw InputError(where + ": column " + std::to_string(c + 1) + ": not a finite number \"" +
                         std::string(f) + "\"");
    }
    const auto f = fields.back();
    int label = -1;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
    if (ec != std::errc() || ptr != f.data() + f.size() || label < 0)
      throw InputError(where + ": column " + std::to_string(fields.size()) +
                       ": class must be a nonnegative integer, got \"" + std::string(f) + "\"");
    samples->add(row, label);
  }
  if (!samples) throw InputError(src + ": missing header row");
  return std::move(*samples);
}

SampleSet parse_samples(const std::filesystem::path& path) {
  return parse_samples_csv(read_text_file(path), path.string());
}

std::string samples_to_csv(const SampleSet& samples) {
  std::string out;
  for (int c = 0; c < samples.num_features(); ++c) out += "x" + std::to_string(c) + ",";
  out += "class\n";
  for (size_t i = 0; i < samples.size(); ++i) {
    for (double v : samples.row(i)) out += format_double(v) + ",";
    out += std::to_string(samples.label(i)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- reports

std::string stats_to_json(const SolverStats& stats) {
  Json doc;
  doc["recursions"] = stats.recursions;
  doc["memo_entries"] = stats.memo_entries;
  doc["memo_hits"] = stats.memo_hits;
  doc["milliseconds"] = stats.millis;
  return doc.dump() + "\n";
}

std::string report_to_json(const VerificationReport& report) {
  Json doc;
  doc["faithful"] = report.faithful;
  doc["counterexample"] = report.counterexample ? Json(report.counterexample->z) : Json(nullptr);
  doc["cells_checked"] = report.cells_checked;
  doc["milliseconds"] = report.millis;
  return doc.dump() + "\n";
}

}  // namespace bornagain

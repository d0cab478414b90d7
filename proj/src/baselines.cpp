#include "qbag/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "qbag/quantum.hpp"

namespace qbag {

namespace {

constexpr std::uint64_t kStreamTree = 0xE1;  // same derivation as ensemble learners
constexpr int kModelVersion = 1;
constexpr double kMinImprovement = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();  // weighted child impurity
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const LabelVector& y, const TreeConfig& config)
      : x_(x), y_(y), config_(config), is_class_(y.is_class()) {}

  DecisionTree build() {
    DecisionTree tree;
    tree.task = is_class_ ? Task::Classification : Task::Regression;
    std::vector<std::uint32_t> all(x_.rows());
    std::iota(all.begin(), all.end(), 0);
    grow(tree, all, 0);
    return tree;
  }

 private:
  double node_impurity(const std::vector<std::uint32_t>& rows) const {
    if (is_class_) {
      const auto& codes = y_.class_codes();
      std::vector<std::size_t> counts(y_.num_classes(), 0);
      for (std::uint32_t r : rows) ++counts[codes[r]];
      double sum_sq = 0.0;
      for (std::size_t c : counts) sum_sq += static_cast<double>(c) * static_cast<double>(c);
      const double n = static_cast<double>(rows.size());
      return 1.0 - sum_sq / (n * n);
    }
    const auto& targets = y_.numeric_values();
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint32_t r : rows) {
      sum += targets[r];
      sum_sq += targets[r] * targets[r];
    }
    const double n = static_cast<double>(rows.size());
    return (sum_sq - sum * sum / n) / n;  // population variance
  }

  double leaf_value(const std::vector<std::uint32_t>& rows) const {
    if (is_class_) {
      const auto& codes = y_.class_codes();
      std::vector<std::size_t> counts(y_.num_classes(), 0);
      for (std::uint32_t r : rows) ++counts[codes[r]];
      std::size_t best = 0;
      for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = c;  // ties keep the smaller code
      }
      return static_cast<double>(best);
    }
    const auto& targets = y_.numeric_values();
    double sum = 0.0;
    for (std::uint32_t r : rows) sum += targets[r];
    return sum / static_cast<double>(rows.size());
  }

  // Weighted child impurity of the best split on one feature, scanning
  // midpoints between consecutive distinct values in sorted order.
  void scan_feature(const std::vector<std::uint32_t>& rows, int feature, Split& best) const {
    std::vector<std::pair<double, std::uint32_t>> order;
    order.reserve(rows.size());
    for (std::uint32_t r : rows) order.emplace_back(x_.at(r, feature), r);
    std::sort(order.begin(), order.end());
    const double n = static_cast<double>(rows.size());

    if (is_class_) {
      const auto& codes = y_.class_codes();
      const int num_classes = y_.num_classes();
      std::vector<double> left(num_classes, 0.0), right(num_classes, 0.0);
      for (std::uint32_t r : rows) right[codes[r]] += 1.0;
      double nl = 0.0, left_sq = 0.0;
      double right_sq = 0.0;
      for (double c : right) right_sq += c * c;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const int code = codes[order[i].second];
        // Move one sample left, maintaining sums of squared counts.
        left_sq += 2.0 * left[code] + 1.0;
        right_sq += -2.0 * right[code] + 1.0;
        left[code] += 1.0;
        right[code] -= 1.0;
        nl += 1.0;
        if (order[i].first == order[i + 1].first) continue;
        const double nr = n - nl;
        const double weighted =
            (nl - left_sq / nl) / n + (nr - right_sq / nr) / n;  // sum of nl*gini terms / n
        if (weighted < best.impurity) {
          best.impurity = weighted;
          best.feature = feature;
          best.threshold = order[i].first + 0.5 * (order[i + 1].first - order[i].first);
        }
      }
      return;
    }

    const auto& targets = y_.numeric_values();
    double left_sum = 0.0, left_sq = 0.0, nl = 0.0;
    double right_sum = 0.0, right_sq = 0.0;
    for (std::uint32_t r : rows) {
      right_sum += targets[r];
      right_sq += targets[r] * targets[r];
    }
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const double t = targets[order[i].second];
      left_sum += t;
      left_sq += t * t;
      right_sum -= t;
      right_sq -= t * t;
      nl += 1.0;
      if (order[i].first == order[i + 1].first) continue;
      const double nr = n - nl;
      const double sse_l = left_sq - left_sum * left_sum / nl;
      const double sse_r = right_sq - right_sum * right_sum / nr;
      const double weighted = (sse_l + sse_r) / n;
      if (weighted < best.impurity) {
        best.impurity = weighted;
        best.feature = feature;
        best.threshold = order[i].first + 0.5 * (order[i + 1].first - order[i].first);
      }
    }
  }

  std::int32_t grow(DecisionTree& tree, const std::vector<std::uint32_t>& rows,
                    std::size_t depth) {
    const std::int32_t index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    const double impurity = node_impurity(rows);
    const bool at_depth_limit =
        config_.max_depth.has_value() && depth >= *config_.max_depth;
    if (impurity <= kMinImprovement || rows.size() < config_.min_samples_split ||
        at_depth_limit) {
      tree.nodes[index].leaf_value = leaf_value(rows);
      return index;
    }

    Split best;
    for (int f = 0; f < static_cast<int>(x_.cols()); ++f) scan_feature(rows, f, best);
    if (best.feature < 0 || best.impurity >= impurity - kMinImprovement) {
      tree.nodes[index].leaf_value = leaf_value(rows);
      return index;
    }

    std::vector<std::uint32_t> left_rows, right_rows;
    for (std::uint32_t r : rows) {
      (x_.at(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
    }
    tree.nodes[index].feature = best.feature;
    tree.nodes[index].threshold = best.threshold;
    const std::int32_t left = grow(tree, left_rows, depth + 1);
    tree.nodes[index].left = left;
    const std::int32_t right = grow(tree, right_rows, depth + 1);
    tree.nodes[index].right = right;
    return index;
  }

  const Matrix& x_;
  const LabelVector& y_;
  const TreeConfig& config_;
  const bool is_class_;
};

using nlohmann::json;

}  // namespace

double gini_impurity(std::span<const int> codes, int num_classes) {
  if (codes.empty()) return 0.0;
  std::vector<double> counts(num_classes, 0.0);
  for (int c : codes) counts[c] += 1.0;
  const double n = static_cast<double>(codes.size());
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += c * c;
  return 1.0 - sum_sq / (n * n);
}

DecisionTree fit_tree(const Matrix& x, const LabelVector& y, const TreeConfig& config) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit a tree on no rows");
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "features and labels differ in size");
  }
  if (config.min_samples_split < 2) {
    throw Error(ErrorCode::InvalidArgument, "min_samples_split must be >= 2");
  }
  return TreeBuilder(x, y, config).build();
}

double predict_tree(const DecisionTree& tree, std::span<const double> x) {
  if (tree.nodes.empty()) throw Error(ErrorCode::InvalidArgument, "empty tree");
  std::int32_t index = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[index];
    if (node.is_leaf()) return node.leaf_value;
    if (static_cast<std::size_t>(node.feature) >= x.size()) {
      throw Error(ErrorCode::DimensionMismatch, "query dimension too small for tree");
    }
    index = x[node.feature] <= node.threshold ? node.left : node.right;
  }
}

int predict_tree_class(const DecisionTree& tree, std::span<const double> x) {
  return static_cast<int>(predict_tree(tree, x));
}

std::uint64_t tree_stream_seed(std::uint64_t seed, std::size_t tree_index) {
  return derive_seed(seed, {kStreamTree, tree_index});
}

BaggedTrees fit_bagged_trees(const Dataset& train, std::size_t tree_count,
                             double bootstrap_fraction, const TreeConfig& config) {
  if (tree_count == 0) throw Error(ErrorCode::InvalidArgument, "tree_count must be >= 1");
  if (!(bootstrap_fraction > 0.0 && bootstrap_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap_fraction must be in (0, 1]");
  }
  const std::size_t n = train.size();
  const std::size_t m = static_cast<std::size_t>(
      std::ceil(bootstrap_fraction * static_cast<double>(n)));

  BaggedTrees model;
  model.task = train.labels.is_class() ? Task::Classification : Task::Regression;
  model.trees.reserve(tree_count);
  for (std::size_t i = 0; i < tree_count; ++i) {
    Rng rng(tree_stream_seed(config.seed, i));
    const BootstrapSample sample = qram_bootstrap(n, m, rng);
    const Matrix sub_features = train.features.select_rows(sample.indices);
    const LabelVector sub_labels = train.labels.subset(sample.indices);
    model.trees.push_back(fit_tree(sub_features, sub_labels, config));
  }
  return model;
}

EnsemblePrediction predict_bagged(const BaggedTrees& model, std::span<const double> x) {
  if (model.trees.empty()) throw Error(ErrorCode::InvalidArgument, "model has no trees");
  if (model.task == Task::Classification) {
    std::vector<int> votes;
    votes.reserve(model.trees.size());
    for (const DecisionTree& tree : model.trees) {
      votes.push_back(predict_tree_class(tree, x));
    }
    return aggregate_class_votes(std::move(votes));
  }
  std::vector<double> outputs;
  outputs.reserve(model.trees.size());
  for (const DecisionTree& tree : model.trees) outputs.push_back(predict_tree(tree, x));
  return aggregate_values(std::move(outputs));
}

std::vector<EnsemblePrediction> predict_bagged_batch(const BaggedTrees& model,
                                                     const Matrix& x) {
  std::vector<EnsemblePrediction> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out.push_back(predict_bagged(model, x.row_span(i)));
  }
  return out;
}

std::string trees_to_text(const BaggedTrees& model) {
  json j;
  j["format"] = "qbag-trees";
  j["version"] = kModelVersion;
  j["task"] = model.task == Task::Classification ? "classification" : "regression";
  json trees = json::array();
  for (const DecisionTree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& node : tree.nodes) {
      nodes.push_back(json{{"feature", node.feature},
                           {"threshold", node.threshold},
                           {"left", node.left},
                           {"right", node.right},
                           {"leaf_value", node.leaf_value}});
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

BaggedTrees trees_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModelFile, std::string("model parse failure: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "qbag-trees") {
      throw Error(ErrorCode::BadModelFile, "not a qbag-trees file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::BadModelFile,
                  "unsupported model version " + j.at("version").dump());
    }
    BaggedTrees model;
    model.task = j.at("task").get<std::string>() == "classification" ? Task::Classification
                                                                     : Task::Regression;
    for (const json& tree_json : j.at("trees")) {
      DecisionTree tree;
      tree.task = model.task;
      for (const json& node_json : tree_json.at("nodes")) {
        TreeNode node;
        node.feature = node_json.at("feature").get<int>();
        node.threshold = node_json.at("threshold").get<double>();
        node.left = node_json.at("left").get<std::int32_t>();
        node.right = node_json.at("right").get<std::int32_t>();
        node.leaf_value = node_json.at("leaf_value").get<double>();
        tree.nodes.push_back(node);
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModelFile, std::string("model field failure: ") + e.what());
  }
}

void save_trees(const BaggedTrees& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path);
  out << trees_to_text(model);
}

BaggedTrees load_trees(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return trees_from_text(buffer.str());
}

}  // namespace qbag

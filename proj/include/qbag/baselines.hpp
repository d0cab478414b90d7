#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbag/aggregate.hpp"
#include "qbag/data.hpp"
#include "qbag/matrix.hpp"

namespace qbag {

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // nullopt = unlimited
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;  // stream root for bagging; a single tree draws nothing
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double leaf_value = 0.0;  // class code (exact integer) or mean target

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at index 0
  Task task = Task::Classification;
};

struct BaggedTrees {
  std::vector<DecisionTree> trees;
  Task task = Task::Classification;
};

double gini_impurity(std::span<const int> codes, int num_classes);

// Greedy CART: splits minimize weighted Gini (classification) or weighted
// variance (regression) over midpoints of consecutive distinct feature
// values; ties prefer the lowest feature index, then the lowest threshold.
// Nodes become leaves when pure, below min_samples_split, at max_depth,
// or when no split strictly reduces impurity.
DecisionTree fit_tree(const Matrix& x, const LabelVector& y, const TreeConfig& config);

// Descends with x[feature] <= threshold going left.
double predict_tree(const DecisionTree& tree, std::span<const double> x);
int predict_tree_class(const DecisionTree& tree, std::span<const double> x);

// Same bootstrap sampler and aggregation rules as the q-means ensemble:
// tree i trains on ceil(fraction*N) qram_bootstrap draws from the derived
// stream (config.seed, i).
std::uint64_t tree_stream_seed(std::uint64_t seed, std::size_t tree_index);
BaggedTrees fit_bagged_trees(const Dataset& train, std::size_t tree_count,
                             double bootstrap_fraction, const TreeConfig& config);
EnsemblePrediction predict_bagged(const BaggedTrees& model, std::span<const double> x);
std::vector<EnsemblePrediction> predict_bagged_batch(const BaggedTrees& model,
                                                     const Matrix& x);

// Same text format family as the q-means ensemble models.
std::string trees_to_text(const BaggedTrees& model);
BaggedTrees trees_from_text(const std::string& text);
void save_trees(const BaggedTrees& model, const std::string& path);
BaggedTrees load_trees(const std::string& path);

}  // namespace qbag

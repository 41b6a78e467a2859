#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opboost {

enum class Loss { Squared, Logistic };

struct BoostParams {
  int num_trees = 80;
  double learning_rate = 0.1;
  int max_layers = 3;       // split levels; leaves sit at most this deep
  double reg_lambda = 1.0;
  double min_split_gain = 0.0;
  Loss loss = Loss::Squared;
};

// Rank-only view of the training data: each feature column is the 1..n
// ordinal ranking of its (possibly desensitized) values. Split search never
// sees values, which is the whole point.
struct OrdinalDataset {
  std::size_t n = 0;
  std::vector<std::vector<std::uint32_t>> features;  // [feature][sample]
  std::vector<double> labels;
};

struct TreeNode {
  bool is_leaf = true;
  int feature_id = -1;
  std::uint32_t split_ordinal = 0;
  int split_value = 0;
  bool resolved = false;  // split nodes start ordinal-only until values arrive
  double leaf_weight = 0.0;
};

// nodes keyed by heap position: root 1, children of id are 2*id and 2*id+1,
// which lets the text serialization omit child pointers
struct Tree {
  std::map<int, TreeNode> nodes;
};

struct PartialForest {
  double base_score = 0.0;
  BoostParams params;
  std::vector<Tree> trees;

  bool fully_resolved() const;
};

// second-order gain of a candidate split, already net of min_split_gain
double split_gain(double GL, double HL, double GR, double HR, const BoostParams& params);

struct SplitChoice {
  int feature_id = -1;
  std::uint32_t split_ordinal = 0;
  double gain = 0.0;
};

// exhaustive scan over every feature and every gap between consecutive ranks
// within `indices`; ties go to the lowest feature id, then lowest ordinal;
// nullopt when no split has positive gain
std::optional<SplitChoice> find_best_split(const std::vector<std::size_t>& indices,
                                           const OrdinalDataset& dataset,
                                           const std::vector<double>& g,
                                           const std::vector<double>& h,
                                           const BoostParams& params);

PartialForest train(const OrdinalDataset& dataset, const BoostParams& params);

// routes by value (go left iff value <= split_value); forest must be resolved.
// Logistic models return a probability.
double predict(const PartialForest& forest, const std::vector<int>& values_by_feature);

// fills split values from per-feature (values, ranks) columns: a node holding
// ordinal d takes the value of the sample ranked d
void resolve_with_columns(PartialForest& forest,
                          const std::vector<std::vector<int>>& value_columns,
                          const std::vector<std::vector<std::uint32_t>>& rank_columns);

std::string serialize_forest(const PartialForest& forest);
PartialForest parse_forest(const std::string& text);

}  // namespace opboost

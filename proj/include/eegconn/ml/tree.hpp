#pragma once

#include "eegconn/ml/hyperparams.hpp"
#include "eegconn/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace eegconn::ml {

struct TreeParams {
  int max_depth = 2;
  int min_samples_split = 4;
  int min_samples_leaf = 8;
  // Features considered per split; 0 means all.
  int max_features = 0;
};

TreeParams tree_params_from(const Hyperparameters& p);

/// CART classifier grown on Gini impurity. Among equally good splits the
/// lower feature index, then the lower threshold, wins.
class DecisionTree {
 public:
  /// `rows` selects (possibly repeated) training rows of x; `rng` is used
  /// only when params.max_features restricts the candidate features.
  static DecisionTree fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                          const TreeParams& params, const std::vector<int>& rows, Rng* rng);
  static DecisionTree fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                          const TreeParams& params);

  /// Class proportions at the leaf reached by `sample`.
  Eigen::VectorXd leaf_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& sample) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  int depth() const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Eigen::VectorXd distribution;
  };

  int grow(const Eigen::MatrixXd& x, const std::vector<int>& y, std::vector<int> rows, int depth,
           const TreeParams& params, Rng* rng);
  int depth_from(int node) const;

  int n_classes_ = 0;
  std::vector<Node> nodes_;
};

struct ForestParams {
  TreeParams tree;
  int n_estimators = 40;
};

ForestParams forest_params_from(const Hyperparameters& p);

/// Bootstrap-aggregated trees, sqrt(d) candidate features per split, each
/// tree seeded from (seed, tree index). Prediction averages leaf class
/// proportions.
class RandomForest {
 public:
  static RandomForest fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                          const ForestParams& params, std::uint64_t seed);

  std::vector<int> predict(const Eigen::MatrixXd& x) const;
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  int n_classes_ = 0;
  std::vector<DecisionTree> trees_;
};

}  // namespace eegconn::ml

#pragma once

#include "eegconn/features.hpp"
#include "eegconn/ml/hyperparams.hpp"
#include "eegconn/ml/mlp.hpp"
#include "eegconn/ml/svm.hpp"
#include "eegconn/ml/tree.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <variant>
#include <vector>

namespace eegconn::ml {

/// Per-column z-scoring fitted on training rows; constant columns keep
/// unit scale.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

class TrainedModel {
 public:
  Family family() const { return family_; }
  const Hyperparameters& hyperparameters() const { return params_; }
  const std::vector<FeatureId>& schema() const { return schema_; }
  /// Dataset label indices seen during training, ascending.
  const std::vector<int>& classes() const { return classes_; }

  /// Throws std::invalid_argument when the column count differs from the
  /// training schema.
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
  int predict(const FeatureVector& features) const;

  const DecisionTree* tree() const { return std::get_if<DecisionTree>(&impl_); }
  const RandomForest* forest() const { return std::get_if<RandomForest>(&impl_); }

 private:
  friend TrainedModel train(Family, const Hyperparameters&, const Dataset&, std::uint64_t);

  Family family_ = Family::svm;
  Hyperparameters params_;
  std::vector<FeatureId> schema_;
  std::vector<int> classes_;
  bool standardized_ = false;
  Standardizer standardizer_;
  std::variant<SvmModel, DecisionTree, RandomForest, MlpModel> impl_;
};

/// Fits one classifier. SVM and MLP inputs are standardized with statistics
/// of the training rows. Throws std::invalid_argument for fewer than two
/// classes, non-finite features, or invalid hyperparameters.
TrainedModel train(Family family, const Hyperparameters& params, const Dataset& data,
                   std::uint64_t seed);

}  // namespace eegconn::ml

#include "eegconn/ml/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace eegconn::ml {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean();
  s.scale = ((x.rowwise() - s.mean).array().square().colwise().sum() / n).sqrt().matrix();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j))))) s.scale(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

TrainedModel train(Family family, const Hyperparameters& params, const Dataset& data,
                   std::uint64_t seed) {
  data.validate();
  validate_hyperparameters(family, params);
  if (data.n_rows() == 0) throw std::invalid_argument("train: empty dataset");
  const std::set<int> present(data.labels.begin(), data.labels.end());
  if (present.size() < 2) throw std::invalid_argument("train: training data has a single class");

  TrainedModel m;
  m.family_ = family;
  m.params_ = params;
  m.schema_ = data.feature_ids;
  m.classes_.assign(present.begin(), present.end());
  std::vector<int> compact(data.labels.size());
  for (std::size_t i = 0; i < compact.size(); ++i) {
    compact[i] = static_cast<int>(
        std::lower_bound(m.classes_.begin(), m.classes_.end(), data.labels[i]) - m.classes_.begin());
  }
  const int k = static_cast<int>(m.classes_.size());

  switch (family) {
    case Family::svm: {
      m.standardized_ = true;
      m.standardizer_ = Standardizer::fit(data.features);
      m.impl_ = SvmModel::fit(m.standardizer_.apply(data.features), compact, k, svm_params_from(params));
      break;
    }
    case Family::dt:
      m.impl_ = DecisionTree::fit(data.features, compact, k, tree_params_from(params));
      break;
    case Family::rf:
      m.impl_ = RandomForest::fit(data.features, compact, k, forest_params_from(params), seed);
      break;
    case Family::mlp: {
      m.standardized_ = true;
      m.standardizer_ = Standardizer::fit(data.features);
      m.impl_ = MlpModel::fit(m.standardizer_.apply(data.features), compact, k,
                              mlp_params_from(params), seed);
      break;
    }
  }
  return m;
}

std::vector<int> TrainedModel::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != static_cast<Eigen::Index>(schema_.size())) {
    throw std::invalid_argument("predict: expected " + std::to_string(schema_.size()) +
                                " features, got " + std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw std::invalid_argument("predict: non-finite feature value");
  const Eigen::MatrixXd input = standardized_ ? standardizer_.apply(x) : x;
  std::vector<int> compact = std::visit([&](const auto& impl) { return impl.predict(input); }, impl_);
  for (auto& c : compact) c = classes_[c];
  return compact;
}

int TrainedModel::predict(const FeatureVector& features) const {
  if (features.feature_ids.size() != schema_.size() || features.feature_ids != schema_) {
    throw std::invalid_argument("predict: feature schema does not match the training schema");
  }
  return predict(Eigen::MatrixXd(features.values.transpose())).front();
}

}  // namespace eegconn::ml

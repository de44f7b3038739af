#pragma once

#include "eegconn/connectivity.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace eegconn {

/// Percentage of correct responses, 100 * correct / total.
double percentage_accuracy(long correct, long total);

/// Three performance-change classes cut at mu, mu+sigma, mu+2sigma, mu+3sigma.
struct ClassBinning {
  double mu = 20.76;
  double sigma = 14.78;
  std::vector<std::string> labels{"low", "medium", "high"};

  void validate() const;
  /// Sample mean and standard deviation (n - 1) of the given deltas.
  static ClassBinning from_deltas(const std::vector<double>& deltas);
};

struct BinResult {
  int label = 0;
  // Set when the value fell outside [mu, mu + 3 sigma] and was clamped.
  bool clamped = false;
};

/// Half-open bins [mu, mu+s), [mu+s, mu+2s), closed top bin [mu+2s, mu+3s].
BinResult bin_label(double delta_accuracy, const ClassBinning& binning);

enum class DeltaMode { absolute, signed_difference };

/// Elementwise |post - pre| (or post - pre in signed mode).
Eigen::MatrixXd connectivity_delta(const ConnectivityMatrix& pre, const ConnectivityMatrix& post,
                                   DeltaMode mode = DeltaMode::absolute);

struct FeatureId {
  Metric metric = Metric::msc;
  std::string source;
  std::string target;

  std::string name() const;
  bool operator==(const FeatureId&) const = default;
};

struct FeatureVector {
  Eigen::VectorXd values;
  std::vector<FeatureId> feature_ids;
};

/// Row-major flattening; element (i, j) becomes feature i*n + j with
/// source = label j and target = label i.
FeatureVector flatten(const Eigen::MatrixXd& matrix, Metric metric,
                      const std::vector<std::string>& channel_labels);

/// Labeled feature matrix, one row per subject.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<FeatureId> feature_ids;
  std::vector<std::string> class_names{"low", "medium", "high"};
  std::vector<std::string> row_ids;

  Eigen::Index n_rows() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  void validate() const;
  /// Number of distinct labels actually present.
  int classes_present() const;
  Dataset select_rows(const std::vector<int>& rows) const;
  Dataset select_features(const std::vector<int>& columns) const;
};

}  // namespace eegconn

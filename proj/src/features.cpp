#include "eegconn/features.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace eegconn {

double percentage_accuracy(long correct, long total) {
  if (total <= 0) throw std::invalid_argument("percentage_accuracy: total must be positive");
  if (correct < 0 || correct > total) {
    throw std::invalid_argument("percentage_accuracy: correct must lie in [0, total]");
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

void ClassBinning::validate() const {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("binning: require finite mu and sigma > 0");
  }
  if (!(mu < mu + sigma && mu + sigma < mu + 2 * sigma && mu + 2 * sigma < mu + 3 * sigma)) {
    throw std::invalid_argument("binning: bin edges are not strictly increasing");
  }
  if (labels.size() != 3) throw std::invalid_argument("binning: exactly three labels required");
}

ClassBinning ClassBinning::from_deltas(const std::vector<double>& deltas) {
  if (deltas.size() < 2) throw std::invalid_argument("binning: need at least two deltas");
  const double n = static_cast<double>(deltas.size());
  const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
  double ss = 0.0;
  for (const double d : deltas) ss += (d - mean) * (d - mean);
  ClassBinning b;
  b.mu = mean;
  b.sigma = std::sqrt(ss / (n - 1.0));
  b.validate();
  return b;
}

BinResult bin_label(double delta, const ClassBinning& binning) {
  binning.validate();
  if (!std::isfinite(delta)) throw std::invalid_argument("bin_label: non-finite delta");
  const double e1 = binning.mu + binning.sigma;
  const double e2 = binning.mu + 2.0 * binning.sigma;
  const double e3 = binning.mu + 3.0 * binning.sigma;
  if (delta < binning.mu) return {0, true};
  if (delta < e1) return {0, false};
  if (delta < e2) return {1, false};
  if (delta <= e3) return {2, false};
  return {2, true};
}

Eigen::MatrixXd connectivity_delta(const ConnectivityMatrix& pre, const ConnectivityMatrix& post,
                                   DeltaMode mode) {
  if (pre.metric != post.metric) throw std::invalid_argument("delta: metric mismatch");
  if (pre.band.low != post.band.low || pre.band.high != post.band.high) {
    throw std::invalid_argument("delta: band mismatch");
  }
  if (pre.channel_labels != post.channel_labels) {
    throw std::invalid_argument("delta: channel label mismatch");
  }
  if (pre.values.rows() != post.values.rows() || pre.values.cols() != post.values.cols()) {
    throw std::invalid_argument("delta: shape mismatch");
  }
  const Eigen::MatrixXd diff = post.values - pre.values;
  return mode == DeltaMode::absolute ? Eigen::MatrixXd(diff.cwiseAbs()) : diff;
}

std::string FeatureId::name() const {
  return std::string(to_string(metric)) + ":" + source + "->" + target;
}

FeatureVector flatten(const Eigen::MatrixXd& m, Metric metric,
                      const std::vector<std::string>& channel_labels) {
  if (m.rows() != m.cols()) throw std::invalid_argument("flatten: matrix is not square");
  if (static_cast<Eigen::Index>(channel_labels.size()) != m.rows()) {
    throw std::invalid_argument("flatten: label count does not match matrix size");
  }
  const Eigen::Index n = m.rows();
  FeatureVector fv;
  fv.values.resize(n * n);
  fv.feature_ids.reserve(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      fv.values(i * n + j) = m(i, j);
      fv.feature_ids.push_back({metric, channel_labels[j], channel_labels[i]});
    }
  }
  if (!fv.values.allFinite()) throw std::invalid_argument("flatten: non-finite value");
  return fv;
}

void Dataset::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw std::invalid_argument("dataset: label count does not match row count");
  }
  if (static_cast<Eigen::Index>(feature_ids.size()) != features.cols()) {
    throw std::invalid_argument("dataset: feature id count does not match column count");
  }
  if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature value");
  for (const int l : labels) {
    if (l < 0 || l >= n_classes()) throw std::invalid_argument("dataset: label out of range");
  }
}

int Dataset::classes_present() const {
  return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(rows[r]);
    out.labels.push_back(labels[rows[r]]);
    if (!row_ids.empty()) out.row_ids.push_back(row_ids[rows[r]]);
  }
  out.feature_ids = feature_ids;
  out.class_names = class_names;
  return out;
}

Dataset Dataset::select_features(const std::vector<int>& columns) const {
  Dataset out;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.features.col(static_cast<Eigen::Index>(c)) = features.col(columns[c]);
    out.feature_ids.push_back(feature_ids[columns[c]]);
  }
  out.labels = labels;
  out.class_names = class_names;
  out.row_ids = row_ids;
  return out;
}

}  // namespace eegconn

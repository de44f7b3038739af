#include "eegconn/ml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eegconn::ml {

TreeParams tree_params_from(const Hyperparameters& p) {
  validate_hyperparameters(Family::dt, p);
  TreeParams t;
  t.max_depth = static_cast<int>(get_number(p, "max_depth"));
  t.min_samples_split = static_cast<int>(get_number(p, "min_samples_split"));
  t.min_samples_leaf = static_cast<int>(get_number(p, "min_samples_leaf"));
  return t;
}

ForestParams forest_params_from(const Hyperparameters& p) {
  validate_hyperparameters(Family::rf, p);
  ForestParams f;
  f.tree.max_depth = static_cast<int>(get_number(p, "max_depth"));
  f.tree.min_samples_split = static_cast<int>(get_number(p, "min_samples_split"));
  f.tree.min_samples_leaf = static_cast<int>(get_number(p, "min_samples_leaf"));
  if (p.count("max_features")) f.tree.max_features = static_cast<int>(get_number(p, "max_features"));
  f.n_estimators = static_cast<int>(get_number(p, "n_estimators"));
  return f;
}

namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0) return 0.0;
  double s = 0.0;
  for (const double c : counts) s += c * c;
  return 1.0 - s / (total * total);
}

}  // namespace

DecisionTree DecisionTree::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                               const TreeParams& params) {
  std::vector<int> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return fit(x, y, n_classes, params, rows, nullptr);
}

DecisionTree DecisionTree::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                               const TreeParams& params, const std::vector<int>& rows, Rng* rng) {
  if (rows.empty()) throw std::invalid_argument("tree: no training rows");
  if (params.max_depth < 1 || params.min_samples_split < 2 || params.min_samples_leaf < 1) {
    throw std::invalid_argument("tree: invalid parameters");
  }
  DecisionTree t;
  t.n_classes_ = n_classes;
  t.grow(x, y, rows, 0, params, rng);
  return t;
}

int DecisionTree::grow(const Eigen::MatrixXd& x, const std::vector<int>& y, std::vector<int> rows,
                       int depth, const TreeParams& params, Rng* rng) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  std::vector<double> counts(n_classes_, 0.0);
  for (const int r : rows) counts[y[r]] += 1.0;
  const double total = static_cast<double>(rows.size());
  {
    Eigen::VectorXd dist(n_classes_);
    for (int c = 0; c < n_classes_; ++c) dist(c) = counts[c] / total;
    nodes_[index].distribution = dist;
  }
  const double parent_impurity = gini(counts, total);
  if (depth >= params.max_depth || static_cast<int>(rows.size()) < params.min_samples_split ||
      parent_impurity <= 0.0) {
    return index;
  }

  const int d = static_cast<int>(x.cols());
  std::vector<int> candidates(d);
  std::iota(candidates.begin(), candidates.end(), 0);
  if (params.max_features > 0 && params.max_features < d && rng) {
    shuffle(candidates.begin(), candidates.end(), *rng);
    candidates.resize(params.max_features);
    std::sort(candidates.begin(), candidates.end());
  }

  const int leaf = params.min_samples_leaf;
  const int n = static_cast<int>(rows.size());
  double best_score = std::numeric_limits<double>::infinity();
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<int> order(rows);
  std::vector<double> left(n_classes_), right(n_classes_);
  for (const int f : candidates) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
    });
    std::fill(left.begin(), left.end(), 0.0);
    right = counts;
    for (int k = 0; k < n - 1; ++k) {
      const int cls = y[order[k]];
      left[cls] += 1.0;
      right[cls] -= 1.0;
      const int n_left = k + 1;
      const int n_right = n - n_left;
      const double v = x(order[k], f);
      const double v_next = x(order[k + 1], f);
      if (!(v < v_next)) continue;
      if (n_left < leaf || n_right < leaf) continue;
      const double score = (n_left * gini(left, n_left) + n_right * gini(right, n_right)) / n;
      if (score < best_score - 1e-12) {
        best_score = score;
        best_feature = f;
        best_threshold = v + (v_next - v) / 2.0;
      }
    }
  }
  if (best_feature < 0) return index;

  std::vector<int> left_rows, right_rows;
  for (const int r : rows) {
    (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();
  nodes_[index].feature = best_feature;
  nodes_[index].threshold = best_threshold;
  const int l = grow(x, y, std::move(left_rows), depth + 1, params, rng);
  nodes_[index].left = l;
  const int r = grow(x, y, std::move(right_rows), depth + 1, params, rng);
  nodes_[index].right = r;
  return index;
}

Eigen::VectorXd DecisionTree::leaf_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& sample) const {
  int node = 0;
  while (nodes_[node].feature >= 0) {
    node = sample(nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                                  : nodes_[node].right;
  }
  return nodes_[node].distribution;
}

std::vector<int> DecisionTree::predict(const Eigen::MatrixXd& x) const {
  std::vector<int> out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::Index best = 0;
    leaf_distribution(x.row(r)).maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

int DecisionTree::depth_from(int node) const {
  if (nodes_[node].feature < 0) return 0;
  return 1 + std::max(depth_from(nodes_[node].left), depth_from(nodes_[node].right));
}

int DecisionTree::depth() const { return nodes_.empty() ? 0 : depth_from(0); }

RandomForest RandomForest::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                               const ForestParams& params, std::uint64_t seed) {
  if (params.n_estimators < 1) throw std::invalid_argument("forest: n_estimators must be >= 1");
  RandomForest forest;
  forest.n_classes_ = n_classes;
  TreeParams tp = params.tree;
  if (tp.max_features == 0) {
    tp.max_features = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
  }
  const auto n = static_cast<std::uint64_t>(x.rows());
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> rows(n);
    for (auto& r : rows) r = static_cast<int>(rng.below(n));
    forest.trees_.push_back(DecisionTree::fit(x, y, n_classes, tp, rows, &rng));
  }
  return forest;
}

std::vector<int> RandomForest::predict(const Eigen::MatrixXd& x) const {
  std::vector<int> out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_classes_);
    for (const auto& t : trees_) acc += t.leaf_distribution(x.row(r));
    Eigen::Index best = 0;
    acc.maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace eegconn::ml

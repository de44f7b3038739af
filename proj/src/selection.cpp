#include "eegconn/selection.hpp"

#include "eegconn/ml/cv.hpp"
#include "eegconn/ml/model.hpp"
#include "eegconn/ml/svm.hpp"
#include "eegconn/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace eegconn {

FfsScorer ffs_scorer_from_string(std::string_view s) {
  if (s == "linear") return FfsScorer::linear;
  if (s == "target") return FfsScorer::target;
  throw std::invalid_argument("ffs scorer must be \"linear\" or \"target\"");
}

std::string_view to_string(FfsScorer s) { return s == FfsScorer::linear ? "linear" : "target"; }

SelectorKind selector_from_string(std::string_view s) {
  if (s == "none") return SelectorKind::none;
  if (s == "ffs") return SelectorKind::ffs;
  if (s == "rfe") return SelectorKind::rfe;
  throw std::invalid_argument("unknown selector \"" + std::string(s) + "\"");
}

std::string_view to_string(SelectorKind s) {
  switch (s) {
    case SelectorKind::none: return "none";
    case SelectorKind::ffs: return "ffs";
    case SelectorKind::rfe: return "rfe";
  }
  return "?";
}

namespace {

constexpr double kLinearC = 1.0;
constexpr double kTolerance = 1e-3;

// Labels remapped to 0..m-1 over the classes actually present.
std::vector<int> compact_labels(const std::vector<int>& labels, int* n_present) {
  const std::set<int> present(labels.begin(), labels.end());
  const std::vector<int> classes(present.begin(), present.end());
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) -
                              classes.begin());
  }
  *n_present = static_cast<int>(classes.size());
  return out;
}

Eigen::VectorXd one_vs_rest(const std::vector<int>& y, int c) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) out(i) = y[i] == c ? 1.0 : -1.0;
  return out;
}

void check_inputs(const Dataset& data, int k) {
  data.validate();
  if (k < 1 || k > data.n_features()) {
    throw std::invalid_argument("feature selection: k must lie in [1, " +
                                std::to_string(data.n_features()) + "]");
  }
  if (data.classes_present() < 2) {
    throw std::invalid_argument("feature selection: dataset has a single class");
  }
}

struct Score {
  double accuracy = -std::numeric_limits<double>::infinity();
  double margin = -std::numeric_limits<double>::infinity();
};

bool better(const Score& a, const Score& b) {
  if (a.accuracy > b.accuracy + 1e-12) return true;
  if (a.accuracy < b.accuracy - 1e-12) return false;
  return a.margin > b.margin + 1e-12;
}

// One inner fold of the linear scorer: Gram blocks of the selected subset
// plus warm-start multipliers of the last accepted model.
struct LinearFold {
  Eigen::MatrixXd z_train;  // standardized with training-row statistics
  Eigen::MatrixXd z_test;
  Eigen::MatrixXd k_train;
  Eigen::MatrixXd k_test;
  std::vector<Eigen::VectorXd> y;  // one-vs-rest targets
  std::vector<int> test_labels;
  std::vector<Eigen::VectorXd> warm;
};

Score score_linear(const LinearFold& fold, int feature, std::vector<Eigen::VectorXd>* alphas) {
  const auto zt = fold.z_train.col(feature);
  const Eigen::MatrixXd k = fold.k_train + zt * zt.transpose();
  const Eigen::MatrixXd kt = fold.k_test + fold.z_test.col(feature) * zt.transpose();
  const int n_classes = static_cast<int>(fold.y.size());
  Eigen::MatrixXd decision(kt.rows(), n_classes);
  if (alphas) alphas->resize(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto sol = ml::solve_svm_dual(k, fold.y[c], kLinearC, kTolerance,
                                        ml::default_svm_iteration_cap(k.rows()), &fold.warm[c]);
    const Eigen::VectorXd coef = sol.alpha.cwiseProduct(fold.y[c]);
    // Signed distance to the hyperplane, comparable across subsets.
    const double norm = std::sqrt(std::max(coef.dot(k * coef), 1e-300));
    decision.col(c) = (kt * coef).array() + sol.bias;
    decision.col(c) /= norm;
    if (alphas) (*alphas)[c] = sol.alpha;
  }
  Score s{0.0, 0.0};
  for (Eigen::Index r = 0; r < decision.rows(); ++r) {
    const int truth = fold.test_labels[r];
    Eigen::Index pred = 0;
    decision.row(r).maxCoeff(&pred);
    if (pred == truth) s.accuracy += 1.0;
    double other = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_classes; ++c) {
      if (c != truth) other = std::max(other, decision(r, c));
    }
    s.margin += decision(r, truth) - other;
  }
  s.accuracy /= static_cast<double>(decision.rows());
  s.margin /= static_cast<double>(decision.rows());
  return s;
}

}  // namespace

std::vector<int> forward_feature_selection(const Dataset& data, const FfsOptions& options) {
  check_inputs(data, options.k);
  const int d = static_cast<int>(data.n_features());
  int n_present = 0;
  const std::vector<int> y = compact_labels(data.labels, &n_present);
  const ml::SplitPlan plan = ml::repeated_stratified_kfold(y, options.folds, 1, options.seed);

  std::vector<LinearFold> folds;
  if (options.scorer == FfsScorer::linear) {
    for (const auto& split : plan.splits) {
      LinearFold f;
      const Eigen::MatrixXd x_train = data.features(split.train, Eigen::all);
      const auto standardizer = ml::Standardizer::fit(x_train);
      f.z_train = standardizer.apply(x_train);
      f.z_test = standardizer.apply(data.features(split.test, Eigen::all));
      f.k_train = Eigen::MatrixXd::Zero(f.z_train.rows(), f.z_train.rows());
      f.k_test = Eigen::MatrixXd::Zero(f.z_test.rows(), f.z_train.rows());
      std::vector<int> y_train;
      for (const int r : split.train) y_train.push_back(y[r]);
      for (const int r : split.test) f.test_labels.push_back(y[r]);
      for (int c = 0; c < n_present; ++c) {
        f.y.push_back(one_vs_rest(y_train, c));
        f.warm.push_back(Eigen::VectorXd::Zero(f.z_train.rows()));
      }
      folds.push_back(std::move(f));
    }
  }

  std::vector<int> selected;
  std::vector<bool> used(d, false);
  Score current;
  while (static_cast<int>(selected.size()) < options.k) {
    std::vector<int> candidates;
    for (int f = 0; f < d; ++f) {
      if (!used[f]) candidates.push_back(f);
    }
    std::vector<Score> scores(candidates.size());
    parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
      const int feature = candidates[i];
      Score total{0.0, 0.0};
      if (options.scorer == FfsScorer::linear) {
        for (const auto& fold : folds) {
          const Score s = score_linear(fold, feature, nullptr);
          total.accuracy += s.accuracy;
          total.margin += s.margin;
        }
      } else {
        std::vector<int> columns = selected;
        columns.push_back(feature);
        const Dataset subset = data.select_features(columns);
        for (std::size_t s = 0; s < plan.splits.size(); ++s) {
          const auto& split = plan.splits[s];
          const auto model = ml::train(options.target, ml::default_hyperparameters(options.target),
                                       subset.select_rows(split.train), mix_seed(options.seed, s));
          const auto pred = model.predict(subset.features(split.test, Eigen::all));
          double correct = 0.0;
          for (std::size_t r = 0; r < pred.size(); ++r) {
            if (pred[r] == data.labels[split.test[r]]) correct += 1.0;
          }
          total.accuracy += correct / static_cast<double>(pred.size());
        }
      }
      const double n_folds = static_cast<double>(plan.splits.size());
      scores[i] = Score{total.accuracy / n_folds, total.margin / n_folds};
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (better(scores[i], scores[best])) best = i;
    }
    if (options.k < d && !selected.empty() && !better(scores[best], current)) break;

    const int feature = candidates[best];
    current = scores[best];
    selected.push_back(feature);
    used[feature] = true;
    for (auto& fold : folds) {
      std::vector<Eigen::VectorXd> alphas;
      score_linear(fold, feature, &alphas);
      const auto zt = fold.z_train.col(feature);
      fold.k_train += zt * zt.transpose();
      fold.k_test += fold.z_test.col(feature) * zt.transpose();
      fold.warm = std::move(alphas);
    }
  }
  return selected;
}

std::vector<int> recursive_feature_elimination(const Dataset& data, int k) {
  check_inputs(data, k);
  const int d = static_cast<int>(data.n_features());
  int n_present = 0;
  const std::vector<int> y = compact_labels(data.labels, &n_present);
  const Eigen::MatrixXd z = ml::Standardizer::fit(data.features).apply(data.features);
  const Eigen::Index n = z.rows();

  std::vector<int> active(d);
  std::iota(active.begin(), active.end(), 0);
  Eigen::MatrixXd gram = z * z.transpose();
  std::vector<Eigen::VectorXd> targets, warm;
  for (int c = 0; c < n_present; ++c) {
    targets.push_back(one_vs_rest(y, c));
    warm.push_back(Eigen::VectorXd::Zero(n));
  }
  Eigen::MatrixXd coef(n, n_present);
  while (static_cast<int>(active.size()) > k) {
    for (int c = 0; c < n_present; ++c) {
      const auto sol = ml::solve_svm_dual(gram, targets[c], kLinearC, kTolerance,
                                          ml::default_svm_iteration_cap(n), &warm[c]);
      warm[c] = sol.alpha;
      coef.col(c) = sol.alpha.cwiseProduct(targets[c]);
    }
    const Eigen::MatrixXd weights = z(Eigen::all, active).transpose() * coef;
    const Eigen::VectorXd importance = weights.rowwise().squaredNorm();
    std::size_t drop = 0;
    for (std::size_t i = 1; i < active.size(); ++i) {
      if (importance(static_cast<Eigen::Index>(i)) <= importance(static_cast<Eigen::Index>(drop))) drop = i;
    }
    const auto col = z.col(active[drop]);
    gram -= col * col.transpose();
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return active;
}

std::vector<int> select_features(const Dataset& data, const SelectorSpec& spec, ml::Family target,
                                 std::uint64_t seed, unsigned jobs) {
  const int d = static_cast<int>(data.n_features());
  const int k = std::min(spec.k, d);
  switch (spec.kind) {
    case SelectorKind::none: {
      std::vector<int> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    case SelectorKind::rfe:
      return recursive_feature_elimination(data, k);
    case SelectorKind::ffs: {
      FfsOptions o;
      o.k = k;
      o.folds = spec.ffs_folds;
      o.scorer = spec.ffs_scorer;
      o.target = target;
      o.seed = seed;
      o.jobs = jobs;
      return forward_feature_selection(data, o);
    }
  }
  return {};
}

}  // namespace eegconn

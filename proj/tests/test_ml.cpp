#include "doctest.h"

#include "fixtures.hpp"

#include "eegconn/ml/cv.hpp"
#include "eegconn/ml/mlp.hpp"
#include "eegconn/ml/model.hpp"
#include "eegconn/ml/pipeline.hpp"
#include "eegconn/ml/svm.hpp"
#include "eegconn/ml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace eegconn;
using namespace eegconn::ml;

namespace {

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  long ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == truth[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("hyperparameter defaults and validation") {
  for (const auto f : {Family::svm, Family::dt, Family::rf, Family::mlp}) {
    CHECK_NOTHROW(validate_hyperparameters(f, default_hyperparameters(f)));
  }
  auto p = default_hyperparameters(Family::svm);
  p["kernel"] = std::string("sigmoid");
  CHECK_THROWS_AS(validate_hyperparameters(Family::svm, p), std::invalid_argument);
  p = default_hyperparameters(Family::mlp);
  p["hidden_layers"] = 4.0;
  CHECK_THROWS_AS(validate_hyperparameters(Family::mlp, p), std::invalid_argument);
  p = default_hyperparameters(Family::dt);
  p["depth"] = 3.0;
  CHECK_THROWS_AS(validate_hyperparameters(Family::dt, p), std::invalid_argument);
  CHECK_THROWS_AS(validate_search_range(Family::svm, "C", 1000.0), std::invalid_argument);
  CHECK_NOTHROW(validate_search_range(Family::svm, "C", 100.0));
}

TEST_CASE("grid cardinality and iteration order") {
  const auto g = HyperparameterGrid::coarse(Family::svm);
  CHECK(g.cardinality() == 60);
  // Last axis varies fastest.
  CHECK(std::get<double>(g.point(0).at("gamma")) == 0.001);
  CHECK(std::get<double>(g.point(1).at("gamma")) == 0.01);
  CHECK(std::get<std::string>(g.point(59).at("kernel")) == "rbf");
  CHECK(HyperparameterGrid::full(Family::svm).cardinality() == 3ULL * 10000 * 1000);
  for (const auto f : {Family::svm, Family::dt, Family::rf, Family::mlp}) {
    CHECK_NOTHROW(HyperparameterGrid::coarse(f).validate());
    CHECK_NOTHROW(HyperparameterGrid::full(f).validate());
  }
  HyperparameterGrid empty;
  empty.family = Family::dt;
  empty.axes = {{"max_depth", {}}};
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("svm dual on a two-point problem") {
  // Hard-margin optimum: w = 1, b = 0, alpha = 1/2 for both points.
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  Eigen::VectorXd y(2);
  y << 1, -1;
  SvmParams p;
  p.C = 100;
  const auto sol = solve_svm_dual(kernel_matrix(x, x, p), y, p.C, 1e-9, 1000);
  CHECK(sol.converged);
  CHECK(sol.alpha(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.alpha(1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.bias == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("svm dual satisfies the KKT conditions") {
  Rng rng(3);
  const int n = 40;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = i % 2 ? 1.0 : -1.0;
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal() + 0.5 * y(i);
  }
  for (const auto kernel : {Kernel::linear, Kernel::polynomial, Kernel::rbf}) {
    SvmParams p;
    p.kernel = kernel;
    p.gamma = 0.5;
    p.C = 2.0;
    const Eigen::MatrixXd k = kernel_matrix(x, x, p);
    const auto sol = solve_svm_dual(k, y, p.C, 1e-6, default_svm_iteration_cap(n));
    REQUIRE(sol.converged);
    CHECK(std::abs(y.dot(sol.alpha)) < 1e-9);
    CHECK(sol.alpha.minCoeff() >= 0.0);
    CHECK(sol.alpha.maxCoeff() <= p.C);
    const Eigen::VectorXd f = k * sol.alpha.cwiseProduct(y) + Eigen::VectorXd::Constant(n, sol.bias);
    for (int i = 0; i < n; ++i) {
      const double m = y(i) * f(i);
      if (sol.alpha(i) < 1e-8) CHECK(m >= 1.0 - 1e-3);
      else if (sol.alpha(i) > p.C - 1e-8) CHECK(m <= 1.0 + 1e-3);
      else CHECK(m == doctest::Approx(1.0).epsilon(1e-3));
    }
  }
}

TEST_CASE("kernel matrices match their formulas") {
  Eigen::MatrixXd a(2, 2), b(1, 2);
  a << 1, 2, 3, 4;
  b << 0.5, -1;
  SvmParams p;
  p.gamma = 0.3;
  p.kernel = Kernel::rbf;
  auto k = kernel_matrix(a, b, p);
  CHECK(k(1, 0) == doctest::Approx(std::exp(-0.3 * ((3 - 0.5) * (3 - 0.5) + 25))));
  p.kernel = Kernel::polynomial;
  k = kernel_matrix(a, b, p);
  CHECK(k(0, 0) == doctest::Approx(std::pow(0.3 * (0.5 - 2), 3)));
}

TEST_CASE("every family separates wide blobs") {
  const auto d = fixtures::separable_blobs(40, 5);
  for (const auto f : {Family::svm, Family::dt, Family::rf, Family::mlp}) {
    const auto m = train(f, default_hyperparameters(f), d, 1);
    CHECK(accuracy(m.predict(d.features), d.labels) >= 0.95);
  }
}

TEST_CASE("three-class models predict only training classes") {
  auto d = fixtures::blobs({Eigen::Vector2d(0, 5), Eigen::Vector2d(-5, -3), Eigen::Vector2d(5, -3)}, 20, 8);
  // Drop class 1 from training; predictions must stay in {0, 2}.
  std::vector<int> rows;
  for (int i = 0; i < d.n_rows(); ++i) {
    if (d.labels[i] != 1) rows.push_back(i);
  }
  const auto sub = d.select_rows(rows);
  for (const auto f : {Family::svm, Family::dt, Family::rf, Family::mlp}) {
    const auto m = train(f, default_hyperparameters(f), sub, 2);
    CHECK(m.classes() == std::vector<int>{0, 2});
    for (const int p : m.predict(d.features)) CHECK((p == 0 || p == 2));
  }
}

TEST_CASE("train rejects bad input") {
  auto d = fixtures::separable_blobs(10, 1);
  auto single = d;
  std::fill(single.labels.begin(), single.labels.end(), 0);
  CHECK_THROWS_AS(train(Family::svm, default_hyperparameters(Family::svm), single, 0), std::invalid_argument);
  auto nan = d;
  nan.features(0, 0) = std::nan("");
  CHECK_THROWS_AS(train(Family::dt, default_hyperparameters(Family::dt), nan, 0), std::invalid_argument);
  auto p = default_hyperparameters(Family::rf);
  p["n_estimators"] = 0.0;
  CHECK_THROWS_AS(train(Family::rf, p, d, 0), std::invalid_argument);
}

TEST_CASE("predict checks the schema and is deterministic") {
  const auto d = fixtures::separable_blobs(20, 2);
  const auto m = train(Family::mlp, default_hyperparameters(Family::mlp), d, 4);
  CHECK_THROWS_AS(m.predict(Eigen::MatrixXd::Zero(3, 5)), std::invalid_argument);
  FeatureVector fv;
  fv.values = d.features.row(0).transpose();
  fv.feature_ids = d.feature_ids;
  const int a = m.predict(fv);
  CHECK(a == m.predict(fv));
  CHECK(a == d.labels[0]);
  fv.feature_ids.pop_back();
  fv.values.conservativeResize(1);
  CHECK_THROWS_AS(m.predict(fv), std::invalid_argument);
}

TEST_CASE("unconstrained tree reproduces its training labels") {
  auto d = fixtures::blobs({Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)}, 15, 9);
  TreeParams p;
  p.max_depth = 10;
  p.min_samples_split = 2;
  p.min_samples_leaf = 1;
  const auto t = DecisionTree::fit(d.features, d.labels, 3, p);
  CHECK(accuracy(t.predict(d.features), d.labels) == 1.0);
  CHECK(t.depth() <= 10);
}

TEST_CASE("tree respects depth and leaf limits and breaks ties to the lower feature") {
  Eigen::MatrixXd x(8, 2);
  std::vector<int> y;
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i;
    x(i, 1) = i;  // identical column: the lower index must win
    y.push_back(i < 4 ? 0 : 1);
  }
  TreeParams p;
  p.max_depth = 1;
  p.min_samples_split = 2;
  p.min_samples_leaf = 1;
  const auto t = DecisionTree::fit(x, y, 2, p);
  CHECK(t.depth() == 1);
  Eigen::RowVectorXd probe(2);
  probe << 3.4, 100;  // feature 0 says class 0; feature 1 says class 1
  CHECK(t.leaf_distribution(probe)(0) == 1.0);
  probe << 3.6, -100;
  CHECK(t.leaf_distribution(probe)(1) == 1.0);

  p.max_depth = 5;
  p.min_samples_leaf = 5;  // no split leaves 5 rows on both sides of 8
  CHECK(DecisionTree::fit(x, y, 2, p).node_count() == 1);
}

TEST_CASE("forest with one tree matches that tree") {
  const auto d = fixtures::blobs({Eigen::Vector2d(0, 0), Eigen::Vector2d(1.5, 1.5)}, 30, 12);
  ForestParams p;
  p.n_estimators = 1;
  p.tree.max_depth = 6;
  p.tree.min_samples_split = 2;
  p.tree.min_samples_leaf = 1;
  const auto f = RandomForest::fit(d.features, d.labels, 2, p, 77);
  REQUIRE(f.trees().size() == 1);
  CHECK(f.predict(d.features) == f.trees().front().predict(d.features));
  const auto g = RandomForest::fit(d.features, d.labels, 2, p, 77);
  CHECK(g.predict(d.features) == f.predict(d.features));
}

TEST_CASE("mlp analytic gradient matches finite differences") {
  Rng rng(21);
  Eigen::MatrixXd x(10, 4);
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
    y.push_back(i % 3);
  }
  for (const auto act : {Activation::logistic, Activation::tanh, Activation::relu}) {
    MlpNetwork net = MlpNetwork::initialize(4, {6, 5}, 3, act, 5);
    MlpNetwork grad;
    mlp_loss_and_gradient(net, x, y, 0.1, &grad);
    double diff2 = 0, norm2 = 0;
    const double h = 1e-6;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      for (Eigen::Index k = 0; k < net.weights[l].size(); ++k) {
        MlpNetwork up = net, down = net;
        up.weights[l](k) += h;
        down.weights[l](k) -= h;
        const double fd = (mlp_loss_and_gradient(up, x, y, 0.1, nullptr) -
                           mlp_loss_and_gradient(down, x, y, 0.1, nullptr)) / (2 * h);
        diff2 += std::pow(fd - grad.weights[l](k), 2);
        norm2 += std::pow(fd, 2);
      }
      for (Eigen::Index k = 0; k < net.biases[l].size(); ++k) {
        MlpNetwork up = net, down = net;
        up.biases[l](k) += h;
        down.biases[l](k) -= h;
        const double fd = (mlp_loss_and_gradient(up, x, y, 0.1, nullptr) -
                           mlp_loss_and_gradient(down, x, y, 0.1, nullptr)) / (2 * h);
        diff2 += std::pow(fd - grad.biases[l](k), 2);
        norm2 += std::pow(fd, 2);
      }
    }
    CHECK(std::sqrt(diff2 / norm2) < 1e-4);
  }
}

TEST_CASE("mlp softmax rows sum to one and both solvers learn") {
  const auto d = fixtures::blobs({Eigen::Vector2d(0, 3), Eigen::Vector2d(-3, -2), Eigen::Vector2d(3, -2)}, 30, 31);
  for (const auto solver : {Solver::adam, Solver::sgd}) {
    MlpParams p;
    p.solver = solver;
    p.learning_rate = solver == Solver::sgd ? 1e-2 : 1e-3;
    const auto m = MlpModel::fit(d.features, d.labels, 3, p, 3);
    const auto proba = m.predict_proba(d.features);
    CHECK((proba.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(accuracy(m.predict(d.features), d.labels) >= 0.9);
    CHECK(m.epochs_run() >= 1);
  }
}

TEST_CASE("stratified folds partition the data") {
  std::vector<int> labels(50);
  for (int i = 0; i < 50; ++i) labels[i] = i % 3;
  const auto plan = repeated_stratified_kfold(labels, 10, 3, 42);
  REQUIRE(plan.splits.size() == 30);
  for (int r = 0; r < 3; ++r) {
    std::vector<int> seen;
    for (int f = 0; f < 10; ++f) {
      const auto& s = plan.splits[r * 10 + f];
      CHECK(s.train.size() + s.test.size() == 50);
      seen.insert(seen.end(), s.test.begin(), s.test.end());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<int> all(50);
    std::iota(all.begin(), all.end(), 0);
    CHECK(seen == all);
  }
  CHECK(repeated_stratified_kfold(labels, 10, 3, 42).splits[7].test == plan.splits[7].test);
  CHECK(repeated_stratified_kfold(labels, 10, 3, 43).splits[7].test != plan.splits[7].test);
}

TEST_CASE("stratification follows class proportions") {
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(0);
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  for (int i = 0; i < 10; ++i) labels.push_back(2);
  const auto plan = repeated_stratified_kfold(labels, 10, 1, 7);
  for (const auto& s : plan.splits) {
    std::map<int, int> counts;
    for (const int i : s.test) counts[labels[i]]++;
    CHECK(counts[0] == 3);
    CHECK(counts[1] == 1);
    CHECK(counts[2] == 1);
  }
}

TEST_CASE("small classes reduce k") {
  std::vector<int> labels{0, 0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  const auto plan = repeated_stratified_kfold(labels, 10, 1, 1);
  CHECK(plan.k == 3);
  CHECK(plan.warnings.size() == 1);
  CHECK_THROWS_AS(repeated_stratified_kfold({0, 0, 0, 1}, 2, 1, 1), std::invalid_argument);
}

TEST_CASE("grid search report invariants") {
  const auto d = fixtures::blobs({Eigen::Vector2d(0, 2), Eigen::Vector2d(-2, -1), Eigen::Vector2d(2, -1)}, 12, 17);
  const auto single = HyperparameterGrid::single(Family::dt, default_hyperparameters(Family::dt));
  const auto r = grid_search(d, single, CvSpec{}, 5);
  CHECK(r.fold_accuracies.size() == 30);
  CHECK(r.points.size() == 1);
  const double mean = std::accumulate(r.fold_accuracies.begin(), r.fold_accuracies.end(), 0.0) / 30.0;
  CHECK(std::abs(mean - r.mean_accuracy) <= 1e-12);
  // Each row is tested once per repeat.
  for (int c = 0; c < 3; ++c) CHECK(r.confusion.row(c).sum() == 12 * 3);
  const auto again = grid_search(d, single, CvSpec{}, 5);
  CHECK(again.fold_accuracies == r.fold_accuracies);
}

TEST_CASE("grid search winner is stable") {
  const auto d = fixtures::blobs({Eigen::Vector2d(0, 1.5), Eigen::Vector2d(-1.5, -1), Eigen::Vector2d(1.5, -1)}, 15, 4);
  HyperparameterGrid g;
  g.family = Family::dt;
  g.axes = {{"max_depth", {2.0, 4.0, 8.0}}, {"min_samples_split", {2.0}}, {"min_samples_leaf", {1.0, 8.0}}};
  CvSpec cv;
  cv.repeats = 1;
  const auto r = grid_search(d, g, cv, 9);
  CHECK(r.mean_accuracy == doctest::Approx(r.points[r.best_index].mean_accuracy));
  for (const auto& p : r.points) CHECK(p.mean_accuracy <= r.mean_accuracy);

  // Appending a strictly worse value keeps the winner.
  double worst = 1.0;
  for (const auto& p : r.points) worst = std::min(worst, p.mean_accuracy);
  if (worst < r.mean_accuracy) {
    auto g2 = g;
    g2.axes[0].second.push_back(2.0);  // duplicate of a value already present
    const auto r2 = grid_search(d, g2, cv, 9);
    CHECK(r2.best_params == r.best_params);
  }
}

TEST_CASE("selection never sees test rows") {
  auto set = fixtures::informative_dataset(60, 5, 3, 10, 2.0, 14);
  const auto& d = set.data;
  const auto plan = repeated_stratified_kfold(d.labels, 5, 1, 3);
  PipelineSpec spec;
  spec.selector.kind = SelectorKind::rfe;
  spec.selector.k = 10;
  spec.family = Family::svm;
  spec.grid = HyperparameterGrid::single(Family::svm, default_hyperparameters(Family::svm));
  const auto& split = plan.splits[2];

  auto corrupted = d;
  for (const int r : split.test) corrupted.labels[r] = (corrupted.labels[r] + 1) % 3;
  const auto clean_fold = pipeline_fold(d, spec, split, plan.k, 11);
  const auto bad_fold = pipeline_fold(corrupted, spec, split, plan.k, 11);
  CHECK(clean_fold.train.feature_ids == bad_fold.train.feature_ids);
  CHECK(clean_fold.train.features == bad_fold.train.features);
  CHECK(clean_fold.train.labels == bad_fold.train.labels);

  const auto m1 = train(Family::svm, spec.grid.point(0), clean_fold.train, 1);
  const auto m2 = train(Family::svm, spec.grid.point(0), bad_fold.train, 1);
  const auto p1 = m1.predict(clean_fold.test.features);
  CHECK(p1 == m2.predict(bad_fold.test.features));
  CHECK(accuracy(p1, clean_fold.test.labels) != accuracy(p1, bad_fold.test.labels));
}

TEST_CASE("pipeline reports are reproducible") {
  auto set = fixtures::informative_dataset(40, 4, 3, 8, 2.0, 2);
  PipelineSpec spec;
  spec.selector.kind = SelectorKind::rfe;
  spec.selector.k = 8;
  spec.family = Family::dt;
  spec.grid = HyperparameterGrid::single(Family::dt, default_hyperparameters(Family::dt));
  spec.cv.k = 4;
  spec.cv.repeats = 2;
  const auto a = evaluate_pipeline(set.data, spec, 99);
  const auto b = evaluate_pipeline(set.data, spec, 99);
  CHECK(a.fold_accuracies == b.fold_accuracies);
  CHECK(a.confusion == b.confusion);
  CHECK(a.cell.selector == "rfe");
  CHECK(a.cell.family == "dt");
  CHECK(a.cell.metric == "pdc");
  spec.cv.jobs = 3;
  CHECK(evaluate_pipeline(set.data, spec, 99).fold_accuracies == a.fold_accuracies);
}

#include "eegconn/ml/cv.hpp"

#include "eegconn/ml/model.hpp"
#include "eegconn/parallel.hpp"
#include "eegconn/random.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace eegconn::ml {

SplitPlan repeated_stratified_kfold(const std::vector<int>& labels, int k, int repeats,
                                    std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cv: k must be at least 2");
  if (repeats < 1) throw std::invalid_argument("cv: repeats must be at least 1");
  std::map<int, std::vector<int>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<int>(i));
  if (members.empty()) throw std::invalid_argument("cv: no rows");

  SplitPlan plan;
  std::size_t smallest = labels.size();
  for (const auto& [label, rows] : members) smallest = std::min(smallest, rows.size());
  if (smallest < 2) throw std::invalid_argument("cv: every class needs at least 2 rows");
  if (smallest < static_cast<std::size_t>(k)) {
    plan.warnings.push_back("cv: smallest class has " + std::to_string(smallest) +
                            " rows; k reduced from " + std::to_string(k));
    k = static_cast<int>(smallest);
  }
  plan.k = k;
  plan.repeats = repeats;

  for (int r = 0; r < repeats; ++r) {
    Rng rng(mix_seed(seed, 0x63760000ULL + static_cast<std::uint64_t>(r)));
    std::vector<int> fold_of(labels.size(), 0);
    std::size_t counter = 0;
    for (auto& [label, rows] : members) {
      std::vector<int> shuffled = rows;
      shuffle(shuffled.begin(), shuffled.end(), rng);
      for (const int row : shuffled) fold_of[row] = static_cast<int>(counter++ % k);
    }
    for (int f = 0; f < k; ++f) {
      Split s;
      s.repeat = r;
      s.fold = f;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        (fold_of[i] == f ? s.test : s.train).push_back(static_cast<int>(i));
      }
      plan.splits.push_back(std::move(s));
    }
  }
  return plan;
}

CvReport evaluate_grid(const Dataset& data, const HyperparameterGrid& grid, const SplitPlan& plan,
                       const std::function<FoldData(const Split&)>& prepare, std::uint64_t seed,
                       unsigned jobs) {
  grid.validate();
  const std::uint64_t n_points = grid.cardinality();
  if (n_points == 0) throw std::invalid_argument("grid search: empty grid");
  if (n_points > kMaxGridPoints) {
    throw std::invalid_argument("grid search: " + std::to_string(n_points) +
                                " points exceeds the limit of " + std::to_string(kMaxGridPoints));
  }
  const std::size_t n_splits = plan.splits.size();
  const int n_classes = data.n_classes();

  std::vector<FoldData> folds(n_splits);
  parallel_for(n_splits, jobs, [&](std::size_t s) { folds[s] = prepare(plan.splits[s]); });

  std::vector<Hyperparameters> points(n_points);
  for (std::uint64_t g = 0; g < n_points; ++g) points[g] = grid.point(g);

  const std::size_t n_tasks = static_cast<std::size_t>(n_points) * n_splits;
  std::vector<double> accuracy(n_tasks, 0.0);
  std::vector<Eigen::MatrixXi> confusion(n_tasks);
  parallel_for(n_tasks, jobs, [&](std::size_t task) {
    const std::size_t g = task / n_splits;
    const std::size_t s = task % n_splits;
    const FoldData& fd = folds[s];
    const TrainedModel model = train(grid.family, points[g], fd.train, mix_seed(seed, g, s));
    const std::vector<int> pred = model.predict(fd.test.features);
    Eigen::MatrixXi cm = Eigen::MatrixXi::Zero(n_classes, n_classes);
    long correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      cm(fd.test.labels[i], pred[i]) += 1;
      if (pred[i] == fd.test.labels[i]) ++correct;
    }
    accuracy[task] = pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
    confusion[task] = std::move(cm);
  });

  CvReport report;
  report.seed = seed;
  report.k = plan.k;
  report.repeats = plan.repeats;
  report.class_names = data.class_names;
  report.grid_cardinality = n_points;
  report.warnings = plan.warnings;
  double best_mean = -1.0;
  for (std::uint64_t g = 0; g < n_points; ++g) {
    PointScore ps;
    ps.params = points[g];
    ps.fold_accuracies.assign(accuracy.begin() + g * n_splits, accuracy.begin() + (g + 1) * n_splits);
    double sum = 0.0;
    for (const double a : ps.fold_accuracies) sum += a;
    ps.mean_accuracy = sum / static_cast<double>(n_splits);
    if (ps.mean_accuracy > best_mean) {
      best_mean = ps.mean_accuracy;
      report.best_index = g;
    }
    report.points.push_back(std::move(ps));
  }
  const PointScore& best = report.points[report.best_index];
  report.best_params = best.params;
  report.fold_accuracies = best.fold_accuracies;
  report.mean_accuracy = best.mean_accuracy;
  report.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t s = 0; s < n_splits; ++s) report.confusion += confusion[report.best_index * n_splits + s];
  return report;
}

CvReport grid_search(const Dataset& data, const HyperparameterGrid& grid, const CvSpec& cv,
                     std::uint64_t seed) {
  data.validate();
  const SplitPlan plan = repeated_stratified_kfold(data.labels, cv.k, cv.repeats, seed);
  auto prepare = [&](const Split& s) {
    return FoldData{data.select_rows(s.train), data.select_rows(s.test)};
  };
  CvReport report = evaluate_grid(data, grid, plan, prepare, seed, cv.jobs);
  report.cell.family = std::string(to_string(grid.family));
  return report;
}

}  // namespace eegconn::ml

#pragma once

#include "eegconn/features.hpp"
#include "eegconn/ml/hyperparams.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace eegconn::ml {

struct Split {
  int repeat = 0;
  int fold = 0;
  std::vector<int> train;
  std::vector<int> test;
};

struct SplitPlan {
  int k = 10;
  int repeats = 3;
  std::vector<Split> splits;
  std::vector<std::string> warnings;
};

/// Class-stratified k-fold splits, repeated with fresh shuffles. Each
/// class's shuffled members are dealt round-robin across folds, the deal
/// continuing from one class to the next. k drops to the smallest class
/// size (with a warning) when a class has fewer than k members; a class
/// with fewer than 2 members is an error.
SplitPlan repeated_stratified_kfold(const std::vector<int>& labels, int k, int repeats,
                                    std::uint64_t seed);

struct CvSpec {
  int k = 10;
  int repeats = 3;
  unsigned jobs = 1;
};

struct CellId {
  std::string metric;
  std::string selector;
  std::string family;
};

struct PointScore {
  Hyperparameters params;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
};

struct CvReport {
  CellId cell;
  std::uint64_t seed = 0;
  int k = 0;
  int repeats = 0;
  std::vector<std::string> class_names;
  // Fractions in [0, 1] for the winning grid point, in split order.
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  Hyperparameters best_params;
  std::size_t best_index = 0;
  // rows: true class, columns: predicted class, summed over all test folds.
  Eigen::MatrixXi confusion;
  std::uint64_t grid_cardinality = 0;
  std::vector<PointScore> points;
  std::vector<std::string> warnings;
};

/// Training and test views for one split, after any per-split feature
/// selection.
struct FoldData {
  Dataset train;
  Dataset test;
};

/// Evaluates every grid point on every split; `prepare` is called once per
/// split and its output shared by all points. Task (point g, split s) trains
/// with seed mix_seed(seed, g, s). The winner is the highest mean accuracy,
/// the earliest point on ties.
CvReport evaluate_grid(const Dataset& data, const HyperparameterGrid& grid, const SplitPlan& plan,
                       const std::function<FoldData(const Split&)>& prepare, std::uint64_t seed,
                       unsigned jobs);

CvReport grid_search(const Dataset& data, const HyperparameterGrid& grid, const CvSpec& cv,
                     std::uint64_t seed);

/// Refuses grids larger than this many points.
inline constexpr std::uint64_t kMaxGridPoints = 100000;

}  // namespace eegconn::ml

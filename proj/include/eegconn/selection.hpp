#pragma once

#include "eegconn/features.hpp"
#include "eegconn/ml/hyperparams.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace eegconn {

enum class FfsScorer {
  linear,  // one-vs-rest linear SVM, C = 1, on standardized features
  target,  // the classifier family being evaluated, with its default settings
};

FfsScorer ffs_scorer_from_string(std::string_view s);
std::string_view to_string(FfsScorer s);

struct FfsOptions {
  int k = 100;
  int folds = 5;
  FfsScorer scorer = FfsScorer::linear;
  ml::Family target = ml::Family::svm;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Greedy forward selection by stratified CV accuracy on `data`; candidates
/// with equal accuracy are ordered by mean multi-class margin (signed
/// distance to the true class's one-vs-rest hyperplane minus the largest
/// other, linear scorer only), then by the lower index. Stops early when a full round fails to improve the
/// (accuracy, margin) score, unless k equals the feature count. Returns
/// indices in the order they were added.
std::vector<int> forward_feature_selection(const Dataset& data, const FfsOptions& options);

/// Recursive elimination with a one-vs-rest linear SVM (C = 1) on
/// standardized features. Each step drops the feature with the smallest
/// sum over classes of squared weights, the higher index on ties. Returns
/// the k survivors in ascending order.
std::vector<int> recursive_feature_elimination(const Dataset& data, int k);

enum class SelectorKind { none, ffs, rfe };

SelectorKind selector_from_string(std::string_view s);
std::string_view to_string(SelectorKind s);

struct SelectorSpec {
  SelectorKind kind = SelectorKind::rfe;
  int k = 100;
  int ffs_folds = 5;
  FfsScorer ffs_scorer = FfsScorer::linear;
};

/// Column indices chosen by the selector on `data`, ascending for rfe and
/// in greedy order for ffs. k larger than the feature count is clamped.
std::vector<int> select_features(const Dataset& data, const SelectorSpec& spec, ml::Family target,
                                 std::uint64_t seed, unsigned jobs = 1);

}  // namespace eegconn

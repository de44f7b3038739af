#pragma once

#include "eegconn/connectivity.hpp"
#include "eegconn/features.hpp"
#include "eegconn/ml/cv.hpp"
#include "eegconn/ml/hyperparams.hpp"
#include "eegconn/selection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eegconn::ml {

struct SubjectPair {
  std::string subject_id;
  ConnectivityMatrix pre;
  ConnectivityMatrix post;
  int label = 0;
};

/// One row per subject: the flattened pre/post delta of its matrices.
Dataset build_dataset(const std::vector<SubjectPair>& subjects, DeltaMode mode,
                      const std::vector<std::string>& class_names);

struct PipelineSpec {
  SelectorSpec selector;
  Family family = Family::mlp;
  HyperparameterGrid grid;
  CvSpec cv;
  DeltaMode delta = DeltaMode::absolute;
  std::vector<std::string> class_names{"low", "medium", "high"};
};

/// Training and test views of one split: rows taken from `data`, then
/// columns chosen by the selector fitted on the training rows alone.
FoldData pipeline_fold(const Dataset& data, const PipelineSpec& spec, const Split& split, int k,
                       std::uint64_t seed);

/// Repeated stratified CV of selector + grid search. Features are selected
/// on each split's training rows only and shared by all grid points of that
/// split.
CvReport evaluate_pipeline(const Dataset& data, const PipelineSpec& spec, std::uint64_t seed);

CvReport evaluate_pipeline(const std::vector<SubjectPair>& subjects, const PipelineSpec& spec,
                           std::uint64_t seed);

}  // namespace eegconn::ml

#include "eegconn/ml/pipeline.hpp"

#include "eegconn/random.hpp"

#include <stdexcept>

namespace eegconn::ml {

Dataset build_dataset(const std::vector<SubjectPair>& subjects, DeltaMode mode,
                      const std::vector<std::string>& class_names) {
  if (subjects.empty()) throw std::invalid_argument("dataset: no subjects");
  Dataset data;
  data.class_names = class_names;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    const auto& subj = subjects[s];
    const Eigen::MatrixXd delta = connectivity_delta(subj.pre, subj.post, mode);
    const FeatureVector fv = flatten(delta, subj.pre.metric, subj.pre.channel_labels);
    if (s == 0) {
      data.feature_ids = fv.feature_ids;
      data.features.resize(static_cast<Eigen::Index>(subjects.size()), fv.values.size());
    } else if (fv.feature_ids != data.feature_ids) {
      throw std::invalid_argument("dataset: subject " + subj.subject_id +
                                  " has a different channel layout");
    }
    data.features.row(static_cast<Eigen::Index>(s)) = fv.values.transpose();
    data.labels.push_back(subj.label);
    data.row_ids.push_back(subj.subject_id);
  }
  data.validate();
  return data;
}

FoldData pipeline_fold(const Dataset& data, const PipelineSpec& spec, const Split& split, int k,
                       std::uint64_t seed) {
  const Dataset train = data.select_rows(split.train);
  const auto columns = select_features(
      train, spec.selector, spec.family,
      mix_seed(seed, 0x73656cULL, static_cast<std::uint64_t>(split.repeat * k + split.fold)));
  return FoldData{train.select_features(columns), data.select_rows(split.test).select_features(columns)};
}

CvReport evaluate_pipeline(const Dataset& data, const PipelineSpec& spec, std::uint64_t seed) {
  data.validate();
  if (data.classes_present() < 2) throw std::invalid_argument("pipeline: fewer than two classes");
  if (spec.grid.family != spec.family) throw std::invalid_argument("pipeline: grid family mismatch");
  const SplitPlan plan = repeated_stratified_kfold(data.labels, spec.cv.k, spec.cv.repeats, seed);
  auto prepare = [&](const Split& split) { return pipeline_fold(data, spec, split, plan.k, seed); };
  CvReport report = evaluate_grid(data, spec.grid, plan, prepare, seed, spec.cv.jobs);
  report.cell.family = std::string(to_string(spec.family));
  report.cell.selector = std::string(to_string(spec.selector.kind));
  if (!data.feature_ids.empty()) report.cell.metric = std::string(to_string(data.feature_ids.front().metric));
  return report;
}

CvReport evaluate_pipeline(const std::vector<SubjectPair>& subjects, const PipelineSpec& spec,
                           std::uint64_t seed) {
  return evaluate_pipeline(build_dataset(subjects, spec.delta, spec.class_names), spec, seed);
}

}  // namespace eegconn::ml

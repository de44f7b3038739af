#pragma once

#include "eegconn/cli/config.hpp"
#include "eegconn/features.hpp"
#include "eegconn/random.hpp"
#include "eegconn/synthetic.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace eegconn::cli {

struct SubjectEntry {
  std::string id;
  int pre_correct = 0;
  int post_correct = 0;
  // Generating class for synthetic cohorts, -1 when unknown.
  int true_class = -1;
};

/// manifest.json of a recordings directory: task scores per subject, from
/// which labels are derived. Recordings are <id>_pre.csv and <id>_post.csv.
struct Manifest {
  int trials = 72;
  std::vector<SubjectEntry> subjects;
  nlohmann::json ground_truth;  // synthetic cohorts only
};

Manifest load_manifest(const std::filesystem::path& dir);
void save_manifest(const Manifest& m, const std::filesystem::path& dir);

std::filesystem::path recording_file(const std::filesystem::path& dir, const std::string& id,
                                     Session session);

/// Percentage-point change in task accuracy between sessions.
double delta_accuracy(const SubjectEntry& s, int trials);

/// Directed lag-1 edges a class template adds to the post-session model.
struct TemplateEdge {
  int target = 0;
  int source = 0;
  double coefficient = 0.0;
};

struct CohortDesign {
  std::vector<std::vector<TemplateEdge>> templates;  // one per class
  std::vector<Eigen::MatrixXd> base;                 // shared base coefficients
};

CohortDesign design_cohort(const SyntheticSpec& spec, std::uint64_t seed);

/// Pre/post ground truth of one synthetic subject.
std::pair<VarGroundTruth, VarGroundTruth> subject_models(const SyntheticSpec& spec,
                                                         const CohortDesign& design, int subject,
                                                         int cls, std::uint64_t seed);

/// Correct-response counts whose accuracy change falls inside class `cls`
/// of the binning.
std::pair<int, int> draw_scores(int cls, int trials, const ClassBinning& binning, Rng& rng);

/// Writes recordings and manifest.json for 3 classes x subjects_per_class.
Manifest write_synthetic_cohort(const SyntheticSpec& spec, const ClassBinning& binning,
                                std::uint64_t seed, const std::filesystem::path& dir, unsigned jobs);

}  // namespace eegconn::cli

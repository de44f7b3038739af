#pragma once

#include "eegconn/connectivity.hpp"
#include "eegconn/features.hpp"
#include "eegconn/ml/hyperparams.hpp"
#include "eegconn/selection.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eegconn::cli {

struct SyntheticSpec {
  int subjects_per_class = 17;
  int channels = 28;
  double duration_s = 60.0;
  double sample_rate = 256.0;
  int var_order = 2;
  // Coefficient of each directed edge a class template adds post-session.
  double template_strength = 0.25;
  int template_edges = 8;
  // Random directed edges each subject also changes between sessions.
  int nuisance_edges = 8;
  double nuisance_strength = 0.15;
  // Standard deviation of per-subject coefficient jitter on the base model.
  double jitter = 0.02;
  int trials = 72;
};

struct PreprocessSpec {
  bool enabled = true;
  double low_cut = 0.1;
  double high_cut = 45.0;
  bool notch = true;
  double notch_center = 50.0;
  // Channels whose per-sample mean is subtracted from every channel; empty
  // skips re-referencing. Subtracting the average of all channels would
  // make the data rank-deficient and the MVAR fit for pdc impossible.
  std::vector<std::string> reference_channels;
  // Remove the reference channels afterwards; retained, they are collinear.
  bool drop_reference = true;
  // "none", "mean" or "zscore"; the latter two need <id>_<session>_baseline.csv.
  std::string baseline = "none";
};

struct ConnectivitySpec {
  std::vector<Metric> metrics{Metric::msc, Metric::wc, Metric::pdc};
  Band band = kBetaBand;
  long welch_window = 256;
  double welch_overlap = 0.5;
  double wc_cycles = 20.0;
  double wc_freq_step = 1.0;
  double omega0 = 6.0;
  // 0 selects the order by AIC up to pdc_max_order.
  int pdc_order = 0;
  int pdc_max_order = 8;
};

struct FeatureSpec {
  DeltaMode delta = DeltaMode::absolute;
  bool recompute_binning = false;
  ClassBinning binning;
};

struct ClassifySpec {
  std::vector<SelectorKind> selectors{SelectorKind::ffs, SelectorKind::rfe};
  std::vector<ml::Family> families{ml::Family::svm, ml::Family::dt, ml::Family::rf, ml::Family::mlp};
  int k = 100;
  ml::GridDensity grid = ml::GridDensity::coarse;
  int folds = 10;
  int repeats = 3;
  FfsScorer ffs_scorer = FfsScorer::linear;
  int ffs_folds = 5;
  // Explicit per-family axes replacing the density preset.
  std::map<ml::Family, ml::HyperparameterGrid> grids;

  ml::HyperparameterGrid grid_for(ml::Family f) const;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  unsigned jobs = 0;
  // Input recordings; absent means the synthetic cohort under the run dir.
  std::optional<std::filesystem::path> recordings;
  SyntheticSpec synthetic;
  PreprocessSpec preprocess;
  ConnectivitySpec connectivity;
  FeatureSpec features;
  ClassifySpec classify;
  std::string run_id;  // empty: derived from the config contents

  std::filesystem::path run_dir() const;
};

struct Issue {
  std::string field;  // JSON pointer, e.g. "/classify/families"
  std::string message;
  bool warning = false;
};

/// Reads a config document, collecting every problem in `issues`. Unknown
/// keys and wrong types are errors.
RunConfig parse_config(const nlohmann::json& doc, std::vector<Issue>& issues);
RunConfig load_config(const std::filesystem::path& path, std::vector<Issue>& issues);

/// Fully expanded config with defaults, excluding out/jobs/run_id.
nlohmann::json canonical_json(const RunConfig& config);
/// 16 hex digits of FNV-1a over the canonical JSON text.
std::string content_hash(const RunConfig& config);

/// Semantic checks; does not touch the file system unless `check_paths`.
std::vector<Issue> validate_config(const RunConfig& config, bool check_paths);

bool has_errors(const std::vector<Issue>& issues);

}  // namespace eegconn::cli

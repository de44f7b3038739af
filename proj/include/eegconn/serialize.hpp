#pragma once

#include "eegconn/connectivity.hpp"
#include "eegconn/features.hpp"
#include "eegconn/ml/cv.hpp"
#include "eegconn/recording.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace eegconn {

/// Matrix file contents plus the sidecar's subject and session.
struct StoredMatrix {
  ConnectivityMatrix matrix;
  std::string subject_id;
  Session session = Session::pre;
};

/// n x n CSV without header plus `<name>.meta.json` holding metric, band,
/// channel_labels, subject_id and session.
void save_connectivity(const ConnectivityMatrix& m, const std::string& subject_id, Session session,
                       const std::filesystem::path& csv);
StoredMatrix load_connectivity(const std::filesystem::path& csv);

struct DatasetProvenance {
  std::string metric;
  Band band;
  std::string delta_mode = "absolute";
  ClassBinning binning;
  bool binning_recomputed = false;
};

/// CSV with a header of feature names then "label", one row per subject,
/// labels written as class names. The `<name>.schema.json` sidecar lists
/// feature ids, class names, row ids and provenance.
void save_dataset(const Dataset& data, const DatasetProvenance& provenance,
                  const std::filesystem::path& csv);
Dataset load_dataset(const std::filesystem::path& csv, DatasetProvenance* provenance = nullptr);
std::filesystem::path schema_path(const std::filesystem::path& csv);

nlohmann::json to_json(const ml::Hyperparameters& p);
ml::Hyperparameters hyperparameters_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ml::CvReport& report);

/// Writes text to a sibling temporary file, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace eegconn

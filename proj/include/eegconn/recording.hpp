#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eegconn {

/// Raised when a file cannot be parsed. The message carries the file path
/// and, where known, the 1-based row and column of the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::filesystem::path& path, long row, long column,
              const std::string& what);
  long row() const { return row_; }
  long column() const { return column_; }

 private:
  long row_;
  long column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Session { pre, post };

std::string_view to_string(Session s);
Session session_from_string(std::string_view s);

/// A fixed-rate multichannel time series. `data` is samples x channels.
struct Recording {
  double sample_rate = 0.0;
  std::vector<std::string> channels;
  Eigen::MatrixXd data;
  std::string subject_id;
  Session session = Session::pre;

  Eigen::Index n_samples() const { return data.rows(); }
  Eigen::Index n_channels() const { return data.cols(); }

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;

  /// Index of the channel with this label; throws std::invalid_argument.
  Eigen::Index channel_index(std::string_view label) const;
};

/// Sidecar path for a CSV data file: "x/name.csv" -> "x/name.meta.json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

Recording load_recording(const std::filesystem::path& csv);
void save_recording(const Recording& rec, const std::filesystem::path& csv);

}  // namespace eegconn

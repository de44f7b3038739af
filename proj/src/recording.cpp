#include "eegconn/recording.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace eegconn {

namespace {

std::string locate(const std::filesystem::path& path, long row, long column,
                   const std::string& what) {
  std::ostringstream os;
  os << path.string();
  if (row > 0) os << ":" << row;
  if (column > 0) os << ":" << column;
  os << ": " << what;
  return os.str();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

FormatError::FormatError(const std::filesystem::path& path, long row, long column,
                         const std::string& what)
    : std::runtime_error(locate(path, row, column, what)), row_(row), column_(column) {}

std::string_view to_string(Session s) { return s == Session::pre ? "pre" : "post"; }

Session session_from_string(std::string_view s) {
  if (s == "pre") return Session::pre;
  if (s == "post") return Session::post;
  throw std::invalid_argument("session must be \"pre\" or \"post\", got \"" +
                              std::string(s) + "\"");
}

void Recording::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("recording: sample_rate must be positive");
  }
  if (static_cast<Eigen::Index>(channels.size()) != data.cols()) {
    throw std::invalid_argument("recording: " + std::to_string(channels.size()) +
                                " channel labels but " + std::to_string(data.cols()) +
                                " data columns");
  }
  if (data.cols() < 2) throw std::invalid_argument("recording: need at least 2 channels");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    for (std::size_t j = i + 1; j < channels.size(); ++j) {
      if (channels[i] == channels[j]) {
        throw std::invalid_argument("recording: duplicate channel label \"" + channels[i] + "\"");
      }
    }
  }
  if (data.rows() < 2) throw std::invalid_argument("recording: need at least 2 samples");
  if (!data.allFinite()) throw std::invalid_argument("recording: non-finite sample value");
}

Eigen::Index Recording::channel_index(std::string_view label) const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] == label) return static_cast<Eigen::Index>(i);
  }
  throw std::invalid_argument("unknown channel label \"" + std::string(label) + "\"");
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

Recording load_recording(const std::filesystem::path& csv) {
  const auto meta_path = sidecar_path(csv);
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IoError("cannot open sidecar " + meta_path.string());
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open recording " + csv.string());

  Recording rec;
  try {
    const auto meta = nlohmann::json::parse(meta_in);
    rec.sample_rate = meta.at("sample_rate").get<double>();
    rec.channels = meta.at("channels").get<std::vector<std::string>>();
    rec.subject_id = meta.value("subject_id", std::string{});
    rec.session = session_from_string(meta.value("session", std::string{"pre"}));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path, 0, 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(meta_path, 0, 0, e.what());
  }

  const long n_channels = static_cast<long>(rec.channels.size());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(csv, 1, 0, "missing header row");
  const auto header = split_commas(line);
  if (static_cast<long>(header.size()) != n_channels) {
    throw FormatError(csv, 1, 0,
                      "sidecar lists " + std::to_string(n_channels) +
                          " channels but header has " + std::to_string(header.size()) +
                          " columns");
  }
  for (long c = 0; c < n_channels; ++c) {
    if (trim(header[c]) != rec.channels[c]) {
      throw FormatError(csv, 1, c + 1,
                        "header label \"" + std::string(trim(header[c])) +
                            "\" does not match sidecar label \"" + rec.channels[c] + "\"");
    }
  }

  std::vector<double> values;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (static_cast<long>(fields.size()) != n_channels) {
      throw FormatError(csv, row, 0,
                        "expected " + std::to_string(n_channels) + " columns, found " +
                            std::to_string(fields.size()));
    }
    for (long c = 0; c < n_channels; ++c) {
      const auto f = trim(fields[c]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw FormatError(csv, row, c + 1, "malformed number \"" + std::string(f) + "\"");
      }
      if (!std::isfinite(v)) throw FormatError(csv, row, c + 1, "non-finite sample");
      values.push_back(v);
    }
  }

  const Eigen::Index n_rows = static_cast<Eigen::Index>(values.size()) / n_channels;
  rec.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(values.data(), n_rows,
                                                              n_channels);
  try {
    rec.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(csv, 0, 0, e.what());
  }
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& csv) {
  rec.validate();
  std::ofstream out(csv, std::ios::trunc);
  if (!out) throw IoError("cannot write " + csv.string());

  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (c) out << ',';
    out << rec.channels[c];
  }
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < rec.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < rec.data.cols(); ++c) {
      if (c) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, rec.data(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + csv.string());

  nlohmann::json meta = {
      {"sample_rate", rec.sample_rate},
      {"channels", rec.channels},
      {"subject_id", rec.subject_id},
      {"session", std::string(to_string(rec.session))},
  };
  std::ofstream meta_out(sidecar_path(csv), std::ios::trunc);
  if (!meta_out) throw IoError("cannot write " + sidecar_path(csv).string());
  meta_out << meta.dump(2) << '\n';
  if (!meta_out) throw IoError("write failed for " + sidecar_path(csv).string());
}

}  // namespace eegconn

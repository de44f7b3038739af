#include "eegconn/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace eegconn {

using nlohmann::json;

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::filesystem::path& path, long row, long col, std::string_view f) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size()) {
    throw FormatError(path, row, col, "malformed number \"" + std::string(f) + "\"");
  }
  if (!std::isfinite(v)) throw FormatError(path, row, col, "non-finite value");
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path, 0, 0, e.what());
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_connectivity(const ConnectivityMatrix& m, const std::string& subject_id, Session session,
                       const std::filesystem::path& csv) {
  std::string text;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      if (j) text += ',';
      append_number(text, m.values(i, j));
    }
    text += '\n';
  }
  json meta;
  meta["metric"] = std::string(to_string(m.metric));
  meta["band"] = {m.band.low, m.band.high};
  meta["channel_labels"] = m.channel_labels;
  meta["subject_id"] = subject_id;
  meta["session"] = std::string(to_string(session));
  write_file_atomic(csv, text);
  write_file_atomic(sidecar_path(csv), meta.dump(2) + "\n");
}

StoredMatrix load_connectivity(const std::filesystem::path& csv) {
  const auto meta_path = sidecar_path(csv);
  const json meta = read_json(meta_path);
  StoredMatrix out;
  try {
    out.matrix.metric = metric_from_string(meta.at("metric").get<std::string>());
    out.matrix.band = Band{meta.at("band").at(0).get<double>(), meta.at("band").at(1).get<double>()};
    out.matrix.channel_labels = meta.at("channel_labels").get<std::vector<std::string>>();
    out.subject_id = meta.at("subject_id").get<std::string>();
    out.session = session_from_string(meta.at("session").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(meta_path, 0, 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(meta_path, 0, 0, e.what());
  }
  const auto n = static_cast<Eigen::Index>(out.matrix.channel_labels.size());
  const auto lines = read_lines(csv);
  if (static_cast<Eigen::Index>(lines.size()) != n) {
    throw FormatError(csv, static_cast<long>(lines.size()), 0,
                      "expected " + std::to_string(n) + " rows");
  }
  out.matrix.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto fields = split_fields(lines[i]);
    if (static_cast<Eigen::Index>(fields.size()) != n) {
      throw FormatError(csv, i + 1, static_cast<long>(fields.size()),
                        "expected " + std::to_string(n) + " columns");
    }
    for (Eigen::Index j = 0; j < n; ++j) out.matrix.values(i, j) = parse_number(csv, i + 1, j + 1, fields[j]);
  }
  return out;
}

std::filesystem::path schema_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".schema.json");
  return p;
}

void save_dataset(const Dataset& data, const DatasetProvenance& provenance,
                  const std::filesystem::path& csv) {
  data.validate();
  std::string text;
  for (const auto& id : data.feature_ids) text += id.name() + ",";
  text += "label\n";
  for (Eigen::Index r = 0; r < data.n_rows(); ++r) {
    for (Eigen::Index c = 0; c < data.n_features(); ++c) {
      append_number(text, data.features(r, c));
      text += ',';
    }
    text += data.class_names[data.labels[r]] + "\n";
  }
  json schema;
  json ids = json::array();
  for (const auto& id : data.feature_ids) {
    ids.push_back({{"metric", std::string(to_string(id.metric))}, {"source", id.source}, {"target", id.target}});
  }
  schema["feature_ids"] = ids;
  schema["class_names"] = data.class_names;
  schema["row_ids"] = data.row_ids;
  schema["metric"] = provenance.metric;
  schema["band"] = {provenance.band.low, provenance.band.high};
  schema["delta_mode"] = provenance.delta_mode;
  schema["binning"] = {{"mu", provenance.binning.mu},
                       {"sigma", provenance.binning.sigma},
                       {"recomputed", provenance.binning_recomputed}};
  write_file_atomic(csv, text);
  write_file_atomic(schema_path(csv), schema.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& csv, DatasetProvenance* provenance) {
  const auto spath = schema_path(csv);
  const json schema = read_json(spath);
  Dataset data;
  try {
    for (const auto& id : schema.at("feature_ids")) {
      data.feature_ids.push_back(FeatureId{metric_from_string(id.at("metric").get<std::string>()),
                                           id.at("source").get<std::string>(),
                                           id.at("target").get<std::string>()});
    }
    data.class_names = schema.at("class_names").get<std::vector<std::string>>();
    data.row_ids = schema.at("row_ids").get<std::vector<std::string>>();
    if (provenance) {
      provenance->metric = schema.at("metric").get<std::string>();
      provenance->band = Band{schema.at("band").at(0).get<double>(), schema.at("band").at(1).get<double>()};
      provenance->delta_mode = schema.at("delta_mode").get<std::string>();
      provenance->binning.mu = schema.at("binning").at("mu").get<double>();
      provenance->binning.sigma = schema.at("binning").at("sigma").get<double>();
      provenance->binning_recomputed = schema.at("binning").at("recomputed").get<bool>();
    }
  } catch (const json::exception& e) {
    throw FormatError(spath, 0, 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(spath, 0, 0, e.what());
  }
  const auto lines = read_lines(csv);
  if (lines.empty()) throw FormatError(csv, 1, 0, "missing header");
  const auto d = static_cast<Eigen::Index>(data.feature_ids.size());
  if (static_cast<Eigen::Index>(split_fields(lines[0]).size()) != d + 1) {
    throw FormatError(csv, 1, 0, "header does not match the schema");
  }
  const auto n = static_cast<Eigen::Index>(lines.size()) - 1;
  data.features.resize(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto fields = split_fields(lines[r + 1]);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1) {
      throw FormatError(csv, r + 2, static_cast<long>(fields.size()), "wrong column count");
    }
    for (Eigen::Index c = 0; c < d; ++c) data.features(r, c) = parse_number(csv, r + 2, c + 1, fields[c]);
    const std::string label(fields[d]);
    const auto it = std::find(data.class_names.begin(), data.class_names.end(), label);
    if (it == data.class_names.end()) throw FormatError(csv, r + 2, d + 1, "unknown label \"" + label + "\"");
    data.labels.push_back(static_cast<int>(it - data.class_names.begin()));
  }
  data.validate();
  return data;
}

json to_json(const ml::Hyperparameters& p) {
  json j = json::object();
  for (const auto& [k, v] : p) {
    if (const auto* d = std::get_if<double>(&v)) j[k] = *d; else j[k] = std::get<std::string>(v);
  }
  return j;
}

ml::Hyperparameters hyperparameters_from_json(const json& j) {
  ml::Hyperparameters p;
  for (const auto& [k, v] : j.items()) {
    if (v.is_number()) p[k] = v.get<double>();
    else if (v.is_string()) p[k] = v.get<std::string>();
    else throw std::invalid_argument("hyperparameter \"" + k + "\" must be a number or string");
  }
  return p;
}

json to_json(const ml::CvReport& r) {
  json j;
  j["cell"] = {{"metric", r.cell.metric}, {"selector", r.cell.selector}, {"family", r.cell.family}};
  j["seed"] = r.seed;
  j["k"] = r.k;
  j["repeats"] = r.repeats;
  j["class_names"] = r.class_names;
  j["fold_accuracies"] = r.fold_accuracies;
  j["mean_accuracy"] = r.mean_accuracy;
  j["mean_accuracy_percent"] = 100.0 * r.mean_accuracy;
  j["best_hyperparameters"] = to_json(r.best_params);
  j["best_index"] = r.best_index;
  json cm = json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < r.confusion.cols(); ++c) row.push_back(r.confusion(i, c));
    cm.push_back(row);
  }
  j["confusion_matrix"] = cm;
  j["grid_cardinality"] = r.grid_cardinality;
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"hyperparameters", to_json(p.params)}, {"mean_accuracy", p.mean_accuracy}});
  }
  j["grid_scores"] = points;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace eegconn

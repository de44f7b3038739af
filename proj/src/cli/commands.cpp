#include "eegconn/cli/commands.hpp"

#include "eegconn/cli/cohort.hpp"
#include "eegconn/connectivity.hpp"
#include "eegconn/ml/pipeline.hpp"
#include "eegconn/mvar.hpp"
#include "eegconn/parallel.hpp"
#include "eegconn/preprocess.hpp"
#include "eegconn/serialize.hpp"
#include "eegconn/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>

namespace eegconn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path recordings_dir(const RunConfig& c) {
  return c.recordings ? *c.recordings : c.run_dir() / "recordings";
}
fs::path preprocessed_dir(const RunConfig& c) { return c.run_dir() / "preprocessed"; }
fs::path matrices_dir(const RunConfig& c) { return c.run_dir() / "matrices"; }
fs::path datasets_dir(const RunConfig& c) { return c.run_dir() / "datasets"; }

fs::path matrix_file(const RunConfig& c, const std::string& subject, Session session, Metric metric) {
  return matrices_dir(c) /
         (subject + "_" + std::string(to_string(session)) + "_" + std::string(to_string(metric)) + ".csv");
}

namespace {

std::mutex log_mutex;

void log(const std::string& line) {
  std::lock_guard lock(log_mutex);
  std::cerr << line << '\n';
}

void print_issues(const std::vector<Issue>& issues) {
  for (const auto& i : issues) {
    log(std::string(i.warning ? "warning: " : "error: ") + (i.field.empty() ? "/" : i.field) + ": " +
        i.message);
  }
}

// Returns false (after printing) when the config has errors.
bool check_config(const RunConfig& c) {
  const auto issues = validate_config(c, true);
  print_issues(issues);
  return !has_errors(issues);
}

bool up_to_date(const fs::path& output, const fs::path& input) {
  std::error_code ec;
  if (!fs::exists(output, ec) || !fs::exists(sidecar_path(output), ec)) return false;
  const auto out_time = fs::last_write_time(output, ec);
  if (ec) return false;
  const auto in_time = fs::last_write_time(input, ec);
  if (ec) return false;
  return out_time >= in_time;
}

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

struct Job {
  std::string subject;
  Session session;
};

std::vector<Job> all_jobs(const Manifest& m) {
  std::vector<Job> jobs;
  for (const auto& s : m.subjects) {
    jobs.push_back({s.id, Session::pre});
    jobs.push_back({s.id, Session::post});
  }
  return jobs;
}

Recording apply_reference(const Recording& rec, const PreprocessSpec& p) {
  if (p.reference_channels.empty()) return rec;
  Recording out = rereference_average(rec, p.reference_channels);
  if (!p.drop_reference) return out;
  std::vector<Eigen::Index> keep;
  std::vector<std::string> labels;
  for (Eigen::Index c = 0; c < out.n_channels(); ++c) {
    const auto& label = out.channels[c];
    if (std::find(p.reference_channels.begin(), p.reference_channels.end(), label) ==
        p.reference_channels.end()) {
      keep.push_back(c);
      labels.push_back(label);
    }
  }
  out.data = Eigen::MatrixXd(out.data(Eigen::all, keep));
  out.channels = std::move(labels);
  out.validate();
  return out;
}

Recording preprocess_recording(const Recording& raw, const PreprocessSpec& p,
                               const fs::path& source_dir) {
  Recording rec = bandpass_filter(raw, p.low_cut, p.high_cut);
  if (p.notch && p.notch_center < rec.sample_rate / 2.0) rec = notch_filter(rec, p.notch_center);
  rec = apply_reference(rec, p);
  if (p.baseline != "none") {
    const auto base_path =
        source_dir / (raw.subject_id + "_" + std::string(to_string(raw.session)) + "_baseline.csv");
    Recording base = bandpass_filter(load_recording(base_path), p.low_cut, p.high_cut);
    if (p.notch && p.notch_center < base.sample_rate / 2.0) base = notch_filter(base, p.notch_center);
    base = apply_reference(base, p);
    rec = baseline_correct(rec, base, p.baseline == "zscore" ? BaselineMode::zscore : BaselineMode::mean);
  }
  return rec;
}

ConnectivityMatrix compute_metric(const Recording& rec, Metric metric, const ConnectivitySpec& t) {
  switch (metric) {
    case Metric::msc:
      return msc_matrix(welch_csd(rec, t.welch_window, t.welch_overlap), t.band);
    case Metric::wc: {
      WaveletCoherenceOptions o;
      o.omega0 = t.omega0;
      o.smoothing.cycles = t.wc_cycles;
      o.freq_step = t.wc_freq_step;
      return wc_matrix(rec, t.band, o);
    }
    case Metric::pdc: {
      const int order = t.pdc_order > 0 ? t.pdc_order : select_order(rec, t.pdc_max_order);
      const MvarModel model = fit_mvar(rec, order);
      if (!model.stable) {
        log("warning: " + rec.subject_id + "/" + std::string(to_string(rec.session)) +
            ": fitted MVAR model is unstable (spectral radius " +
            std::to_string(model.spectral_radius) + ")");
      }
      ConnectivityMatrix m = pdc_matrix(model, t.band, rec.sample_rate);
      m.channel_labels = rec.channels;
      return m;
    }
  }
  throw std::logic_error("unknown metric");
}

// Runs fn for each job, isolating failures. Returns the failure messages.
template <typename Fn>
std::vector<std::string> run_jobs(const std::vector<Job>& jobs, unsigned workers, Fn fn) {
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    try {
      fn(jobs[i]);
    } catch (const std::exception& e) {
      errors[i] = jobs[i].subject + "/" + std::string(to_string(jobs[i].session)) + ": " + e.what();
      log("error: " + errors[i]);
    }
  });
  std::vector<std::string> failures;
  for (auto& e : errors) {
    if (!e.empty()) failures.push_back(std::move(e));
  }
  return failures;
}

}  // namespace

int cmd_synth(const RunConfig& config) {
  if (!check_config(config)) return kExitInvalid;
  if (config.recordings) {
    log("error: /recordings: synth writes a synthetic cohort; remove \"recordings\" from the config");
    return kExitInvalid;
  }
  try {
    const auto dir = recordings_dir(config);
    const auto& s = config.synthetic;
    log("synth: " + std::to_string(3 * s.subjects_per_class) + " subjects, " +
        std::to_string(s.channels) + " channels, " + std::to_string(s.duration_s) + " s -> " +
        dir.string());
    write_synthetic_cohort(s, config.features.binning, config.seed, dir, config.jobs);
  } catch (const std::invalid_argument& e) {
    log(std::string("error: /synthetic: ") + e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_preprocess(const RunConfig& config) {
  if (!check_config(config)) return kExitInvalid;
  if (!config.preprocess.enabled) {
    log("preprocess: disabled in config, nothing to do");
    return kExitOk;
  }
  Manifest manifest;
  try {
    manifest = load_manifest(recordings_dir(config));
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitInvalid;
  }
  const auto in_dir = recordings_dir(config);
  const auto out_dir = preprocessed_dir(config);
  fs::create_directories(out_dir);
  const auto failures = run_jobs(all_jobs(manifest), config.jobs, [&](const Job& job) {
    const auto in = recording_file(in_dir, job.subject, job.session);
    const auto out = recording_file(out_dir, job.subject, job.session);
    if (up_to_date(out, in)) return;
    Recording rec = load_recording(in);
    if (rec.subject_id != job.subject || rec.session != job.session) {
      throw std::runtime_error("sidecar subject/session does not match the file name");
    }
    save_recording(preprocess_recording(rec, config.preprocess, in_dir), out);
  });
  log("preprocess: " + std::to_string(2 * manifest.subjects.size() - failures.size()) + " ok, " +
      std::to_string(failures.size()) + " failed");
  return failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_connectivity(const RunConfig& config) {
  if (!check_config(config)) return kExitInvalid;
  Manifest manifest;
  try {
    manifest = load_manifest(recordings_dir(config));
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitInvalid;
  }
  const auto in_dir = config.preprocess.enabled ? preprocessed_dir(config) : recordings_dir(config);
  fs::create_directories(matrices_dir(config));
  std::atomic<long> written{0};
  const auto failures = run_jobs(all_jobs(manifest), config.jobs, [&](const Job& job) {
    const auto in = recording_file(in_dir, job.subject, job.session);
    if (!fs::exists(in)) {
      throw std::runtime_error("missing input " + in.string() +
                               (config.preprocess.enabled ? " (run preprocess first)" : ""));
    }
    std::vector<Metric> todo;
    for (const auto m : config.connectivity.metrics) {
      if (!up_to_date(matrix_file(config, job.subject, job.session, m), in)) todo.push_back(m);
    }
    if (todo.empty()) return;
    const Recording rec = load_recording(in);
    for (const auto m : todo) {
      const ConnectivityMatrix cm = compute_metric(rec, m, config.connectivity);
      save_connectivity(cm, job.subject, job.session, matrix_file(config, job.subject, job.session, m));
      ++written;
    }
  });
  log("connectivity: " + std::to_string(written.load()) + " matrices written, " +
      std::to_string(failures.size()) + " recordings failed");
  return failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_classify(const RunConfig& config) {
  if (!check_config(config)) return kExitInvalid;
  Manifest manifest;
  try {
    manifest = load_manifest(recordings_dir(config));
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitInvalid;
  }

  // Labels from the task-score change.
  std::vector<double> deltas;
  for (const auto& s : manifest.subjects) deltas.push_back(delta_accuracy(s, manifest.trials));
  ClassBinning binning = config.features.binning;
  std::vector<std::string> warnings;
  try {
    if (config.features.recompute_binning) binning = ClassBinning::from_deltas(deltas);
  } catch (const std::exception& e) {
    log(std::string("error: /features/binning: ") + e.what());
    return kExitInvalid;
  }
  std::vector<int> labels;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto r = bin_label(deltas[i], binning);
    if (r.clamped) {
      warnings.push_back("subject " + manifest.subjects[i].id + ": accuracy change " +
                         std::to_string(deltas[i]) + " outside the binning range, clamped to " +
                         binning.labels[r.label]);
    }
    labels.push_back(r.label);
  }

  json failures = json::array();
  json cells = json::array();
  json datasets = json::object();
  bool any_failed = false;
  for (const auto metric : config.connectivity.metrics) {
    const std::string metric_name(to_string(metric));
    std::vector<ml::SubjectPair> pairs;
    for (std::size_t i = 0; i < manifest.subjects.size(); ++i) {
      const auto& s = manifest.subjects[i];
      try {
        ml::SubjectPair p;
        p.subject_id = s.id;
        p.label = labels[i];
        const auto pre = load_connectivity(matrix_file(config, s.id, Session::pre, metric));
        const auto post = load_connectivity(matrix_file(config, s.id, Session::post, metric));
        if (pre.subject_id != s.id || post.subject_id != s.id || pre.session != Session::pre ||
            post.session != Session::post) {
          throw std::runtime_error("matrix sidecar does not match subject/session");
        }
        p.pre = pre.matrix;
        p.post = post.matrix;
        pairs.push_back(std::move(p));
      } catch (const std::exception& e) {
        failures.push_back({{"subject", s.id}, {"metric", metric_name}, {"error", e.what()}});
        log("error: " + s.id + "/" + metric_name + ": " + e.what());
        any_failed = true;
      }
    }

    Dataset data;
    try {
      data = ml::build_dataset(pairs, config.features.delta, binning.labels);
      DatasetProvenance prov;
      prov.metric = metric_name;
      prov.band = config.connectivity.band;
      prov.delta_mode = config.features.delta == DeltaMode::absolute ? "absolute" : "signed";
      prov.binning = binning;
      prov.binning_recomputed = config.features.recompute_binning;
      const auto path = datasets_dir(config) / (metric_name + ".csv");
      save_dataset(data, prov, path);
      datasets[metric_name] = fs::relative(path, config.run_dir()).string();
    } catch (const std::exception& e) {
      log("error: dataset " + metric_name + ": " + e.what());
      for (const auto sel : config.classify.selectors) {
        for (const auto fam : config.classify.families) {
          cells.push_back({{"cell", {{"metric", metric_name},
                                     {"selector", std::string(to_string(sel))},
                                     {"family", std::string(ml::to_string(fam))}}},
                           {"error", e.what()}});
        }
      }
      any_failed = true;
      continue;
    }

    for (const auto sel : config.classify.selectors) {
      for (const auto fam : config.classify.families) {
        const std::string cell_name =
            metric_name + "+" + std::string(to_string(sel)) + "+" + std::string(ml::to_string(fam));
        ml::PipelineSpec spec;
        spec.selector.kind = sel;
        spec.selector.k = config.classify.k;
        spec.selector.ffs_folds = config.classify.ffs_folds;
        spec.selector.ffs_scorer = config.classify.ffs_scorer;
        spec.family = fam;
        spec.grid = config.classify.grid_for(fam);
        spec.cv.k = config.classify.folds;
        spec.cv.repeats = config.classify.repeats;
        spec.cv.jobs = config.jobs;
        spec.delta = config.features.delta;
        spec.class_names = binning.labels;
        log("classify: " + cell_name + " (" + std::to_string(spec.grid.cardinality()) +
            " grid points x " + std::to_string(spec.cv.k * spec.cv.repeats) + " folds)");
        try {
          const ml::CvReport r = ml::evaluate_pipeline(data, spec, config.seed);
          json j = to_json(r);
          j["cell"]["metric"] = metric_name;
          cells.push_back(j);
          log("classify: " + cell_name + " mean accuracy " + format_percent(r.mean_accuracy) + "%");
        } catch (const std::exception& e) {
          log("error: " + cell_name + ": " + e.what());
          cells.push_back({{"cell", {{"metric", metric_name},
                                     {"selector", std::string(to_string(sel))},
                                     {"family", std::string(ml::to_string(fam))}}},
                           {"error", e.what()}});
          any_failed = true;
        }
      }
    }
  }

  json class_counts = json::object();
  for (std::size_t c = 0; c < binning.labels.size(); ++c) {
    class_counts[binning.labels[c]] = std::count(labels.begin(), labels.end(), static_cast<int>(c));
  }
  json report;
  report["run_id"] = config.run_dir().filename().string();
  report["seed"] = config.seed;
  report["config"] = canonical_json(config);
  report["binning"] = {{"mu", binning.mu}, {"sigma", binning.sigma}, {"labels", binning.labels},
                       {"recomputed", config.features.recompute_binning}};
  report["class_counts"] = class_counts;
  report["datasets"] = datasets;
  report["cells"] = cells;
  report["failures"] = failures;
  report["warnings"] = warnings;
  try {
    write_file_atomic(config.run_dir() / "report.json", report.dump(2) + "\n");
    write_file_atomic(config.run_dir() / "table.md", render_table(report));
    write_file_atomic(config.run_dir() / "hyperparameters.md", render_hyperparameters(report));
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitRuntime;
  }
  log("classify: report written to " + (config.run_dir() / "report.json").string());
  return any_failed ? kExitRuntime : kExitOk;
}

int cmd_validate(const RunConfig& config, const std::vector<Issue>& parse_issues) {
  std::vector<Issue> issues = parse_issues;
  const auto more = validate_config(config, true);
  issues.insert(issues.end(), more.begin(), more.end());
  print_issues(issues);
  if (has_errors(issues)) {
    log("validate: config is not runnable");
    return kExitInvalid;
  }

  std::size_t subjects = 3 * static_cast<std::size_t>(config.synthetic.subjects_per_class);
  if (config.recordings) {
    try {
      const Manifest m = load_manifest(*config.recordings);
      subjects = m.subjects.size();
      for (const auto& s : m.subjects) {
        for (const auto session : {Session::pre, Session::post}) {
          const auto f = recording_file(*config.recordings, s.id, session);
          if (!fs::exists(f)) {
            print_issues({{"/recordings", "missing recording " + f.string()}});
            log("validate: config is not runnable");
            return kExitInvalid;
          }
        }
      }
    } catch (const std::exception& e) {
      print_issues({{"/recordings", e.what()}});
      log("validate: config is not runnable");
      return kExitInvalid;
    }
  }
  const auto& k = config.classify;
  std::uint64_t fits = 0;
  for (const auto fam : k.families) {
    const auto n = k.grid_for(fam).cardinality();
    log("validate: " + std::string(ml::to_string(fam)) + " grid: " + std::to_string(n) + " points");
    fits += n;
  }
  const std::uint64_t splits = static_cast<std::uint64_t>(k.folds) * k.repeats;
  fits *= splits * k.selectors.size() * config.connectivity.metrics.size();
  log("validate: run directory " + config.run_dir().string());
  log("validate: " + std::to_string(subjects) + " subjects, " +
      std::to_string(2 * subjects * config.connectivity.metrics.size()) + " connectivity matrices, " +
      std::to_string(config.connectivity.metrics.size() * k.selectors.size() * k.families.size()) +
      " cells, " + std::to_string(fits) + " model fits, " +
      std::to_string(splits * k.selectors.size() * config.connectivity.metrics.size()) +
      " feature selections");
  log("validate: ok");
  return kExitOk;
}

int cmd_report(const RunConfig& config) {
  const auto path = config.run_dir() / "report.json";
  try {
    const json report = json::parse(read_file(path));
    const std::string table = render_table(report);
    write_file_atomic(config.run_dir() / "table.md", table);
    write_file_atomic(config.run_dir() / "hyperparameters.md", render_hyperparameters(report));
    std::cout << table;
  } catch (const IoError& e) {
    log(std::string("error: ") + e.what() + " (run classify first)");
    return kExitInvalid;
  } catch (const std::exception& e) {
    log(std::string("error: ") + path.string() + ": " + e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

namespace {

// Cells keyed by (metric, selector) in first-seen order, with family columns.
struct Layout {
  std::vector<std::pair<std::string, std::string>> rows;
  std::vector<std::string> families;
};

Layout layout_of(const json& report) {
  Layout l;
  for (const auto& c : report.at("cells")) {
    const auto row = std::pair{c.at("cell").at("metric").get<std::string>(),
                               c.at("cell").at("selector").get<std::string>()};
    const auto fam = c.at("cell").at("family").get<std::string>();
    if (std::find(l.rows.begin(), l.rows.end(), row) == l.rows.end()) l.rows.push_back(row);
    if (std::find(l.families.begin(), l.families.end(), fam) == l.families.end()) l.families.push_back(fam);
  }
  return l;
}

const json* find_cell(const json& report, const std::pair<std::string, std::string>& row,
                      const std::string& family) {
  for (const auto& c : report.at("cells")) {
    if (c.at("cell").at("metric") == row.first && c.at("cell").at("selector") == row.second &&
        c.at("cell").at("family") == family) {
      return &c;
    }
  }
  return nullptr;
}

}  // namespace

std::string render_table(const json& report) {
  const Layout l = layout_of(report);
  std::ostringstream out;
  out << "Mean repeated-CV test accuracy (%) on the change in task accuracy\n\n";
  out << "| Connectivity | Selection |";
  for (const auto& f : l.families) out << ' ' << upper(f) << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < l.families.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& row : l.rows) {
    out << "| " << upper(row.first) << " | " << upper(row.second) << " |";
    for (const auto& f : l.families) {
      const json* c = find_cell(report, row, f);
      if (!c) out << "  |";
      else if (c->contains("error")) out << " failed |";
      else out << ' ' << format_percent(c->at("mean_accuracy").get<double>()) << " |";
    }
    out << '\n';
  }
  if (!report.at("failures").empty()) {
    out << "\nFailed inputs:\n";
    for (const auto& f : report.at("failures")) {
      out << "- " << f.at("subject").get<std::string>() << " (" << f.at("metric").get<std::string>()
          << "): " << f.at("error").get<std::string>() << '\n';
    }
  }
  return out.str();
}

std::string render_hyperparameters(const json& report) {
  const Layout l = layout_of(report);
  std::ostringstream out;
  out << "Best hyperparameters per cell\n\n";
  out << "| Connectivity | Selection | Model | Accuracy (%) | Hyperparameters |\n";
  out << "|---|---|---|---:|---|\n";
  for (const auto& row : l.rows) {
    for (const auto& f : l.families) {
      const json* c = find_cell(report, row, f);
      if (!c) continue;
      out << "| " << upper(row.first) << " | " << upper(row.second) << " | " << upper(f) << " | ";
      if (c->contains("error")) {
        out << "failed | " << c->at("error").get<std::string>() << " |\n";
        continue;
      }
      out << format_percent(c->at("mean_accuracy").get<double>()) << " | ";
      bool first = true;
      for (const auto& [k, v] : c->at("best_hyperparameters").items()) {
        if (!first) out << ", ";
        first = false;
        out << k << '=' << (v.is_string() ? v.get<std::string>() : ml::format_value(v.get<double>()));
      }
      out << " |\n";
    }
  }
  return out.str();
}

}  // namespace eegconn::cli

#include "doctest.h"

#include "eegconn/cli/cohort.hpp"
#include "eegconn/cli/commands.hpp"
#include "eegconn/cli/config.hpp"
#include "eegconn/serialize.hpp"

#include "json.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

using namespace eegconn;
using namespace eegconn::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("eegconn_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small enough to run every stage in seconds.
json tiny_config(const fs::path& out) {
  return json{
      {"seed", 3},
      {"out", out.string()},
      {"jobs", 1},
      {"synthetic", {{"subjects_per_class", 4}, {"channels", 4}, {"duration_s", 30}}},
      {"preprocess", {{"enabled", true}, {"reference_channels", {"ch4"}}}},
      {"connectivity", {{"metrics", {"msc", "pdc"}}, {"pdc_order", 2}}},
      {"classify",
       {{"selectors", {"rfe"}},
        {"families", {"dt", "svm"}},
        {"k", 6},
        {"folds", 3},
        {"repeats", 1},
        {"grids",
         {{"dt", {{"max_depth", {2, 4}}, {"min_samples_split", {2}}, {"min_samples_leaf", {1}}}},
          {"svm", {{"kernel", {"linear"}}, {"C", {1}}, {"gamma", {0.01}}}}}}}}};
}

RunConfig parse_ok(const json& doc) {
  std::vector<Issue> issues;
  auto c = parse_config(doc, issues);
  REQUIRE_FALSE(has_errors(issues));
  return c;
}

bool has_field(const std::vector<Issue>& issues, const std::string& field) {
  for (const auto& i : issues) {
    if (i.field == field && !i.warning) return true;
  }
  return false;
}

int run_cli(const std::vector<std::string>& args) {
  std::string cmd = EEGCONN_CLI_PATH;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

std::map<fs::path, fs::file_time_type> mtimes(const fs::path& dir) {
  std::map<fs::path, fs::file_time_type> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path()] = fs::last_write_time(e.path());
  return out;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto c = parse_ok(json::object());
  CHECK(c.connectivity.metrics.size() == 3);
  CHECK(c.classify.families.size() == 4);
  CHECK(c.classify.folds == 10);
  CHECK(c.classify.repeats == 3);
  CHECK(c.features.binning.mu == doctest::Approx(20.76));
  const auto d = parse_ok({{"connectivity", {{"band", {8, 12}}}}, {"classify", {{"k", 50}}}});
  CHECK(d.connectivity.band.low == 8);
  CHECK(d.classify.k == 50);
}

TEST_CASE("config errors point at their fields") {
  std::vector<Issue> issues;
  parse_config({{"classify", {{"families", {"svm", "knn"}}}}, {"bogus", 1}}, issues);
  CHECK(has_field(issues, "/classify/families/1"));
  CHECK(has_field(issues, "/bogus"));
  issues.clear();
  parse_config({{"seed", "abc"}}, issues);
  CHECK(has_field(issues, "/seed"));
  issues.clear();
  parse_config({{"classify", {{"grids", {{"svm", {{"C", {1000}}}}}}}}}, issues);
  auto c = parse_ok({{"classify", {{"grids", {{"svm", {{"C", {1000}}, {"kernel", {"rbf"}}, {"gamma", {0.1}}}}}}}}});
  CHECK(has_errors(validate_config(c, false)));
  c = parse_ok({{"preprocess", {{"reference_channels", {"M1"}}}}});
  CHECK(has_errors(validate_config(c, false)));
}

TEST_CASE("oversized grids warn with counts and very large ones are refused") {
  auto c = parse_ok({{"classify", {{"grid", "full"}, {"families", {"dt"}}}}});
  auto issues = validate_config(c, false);
  CHECK_FALSE(has_errors(issues));
  bool warned = false;
  for (const auto& i : issues) warned = warned || (i.warning && i.message.find("729") != std::string::npos);
  CHECK_FALSE(warned);  // 729 points is under the warning threshold
  c = parse_ok({{"classify", {{"grid", "full"}, {"families", {"rf"}}}}});
  issues = validate_config(c, false);
  CHECK_FALSE(has_errors(issues));
  CHECK(std::any_of(issues.begin(), issues.end(), [](const Issue& i) { return i.warning; }));
  c = parse_ok({{"classify", {{"grid", "full"}, {"families", {"svm"}}}}});
  CHECK(has_errors(validate_config(c, false)));
}

TEST_CASE("run id depends on content only") {
  auto a = parse_ok({{"seed", 1}, {"out", "x"}, {"jobs", 4}});
  auto b = parse_ok({{"seed", 1}, {"out", "y"}, {"jobs", 1}});
  CHECK(content_hash(a) == content_hash(b));
  CHECK(content_hash(a).size() == 16);
  auto c = parse_ok({{"seed", 2}});
  CHECK(content_hash(a) != content_hash(c));
  a.run_id = "named";
  CHECK(a.run_dir().filename() == "named");
}

TEST_CASE("synthetic scores bin to their class") {
  const ClassBinning binning;
  Rng rng(1);
  for (int cls = 0; cls < 3; ++cls) {
    for (int i = 0; i < 20; ++i) {
      const auto [pre, post] = draw_scores(cls, 72, binning, rng);
      SubjectEntry s{"s", pre, post, cls};
      const auto r = bin_label(delta_accuracy(s, 72), binning);
      CHECK(r.label == cls);
      CHECK_FALSE(r.clamped);
    }
  }
}

TEST_CASE("cli exit codes") {
  TempDir dir("exit");
  CHECK(run_cli({"--help"}) == kExitOk);
  CHECK(run_cli({"frobnicate"}) == kExitInvalid);
  write_json(dir.path / "bad.json", {{"classify", {{"families", {"knn"}}}}});
  CHECK(run_cli({"--config", (dir.path / "bad.json").string(), "validate"}) == kExitInvalid);
  CHECK(run_cli({"--config", (dir.path / "missing.json").string(), "validate"}) == kExitInvalid);
  write_json(dir.path / "good.json", tiny_config(dir.path / "out"));
  CHECK(run_cli({"--config", (dir.path / "good.json").string(), "validate"}) == kExitOk);
  write_json(dir.path / "norec.json", {{"recordings", (dir.path / "nowhere").string()}});
  CHECK(run_cli({"--config", (dir.path / "norec.json").string(), "validate"}) == kExitInvalid);
  // report before classify has nothing to render.
  CHECK(run_cli({"--config", (dir.path / "good.json").string(), "report"}) == kExitInvalid);
}

TEST_CASE("tiny end-to-end run") {
  TempDir dir("e2e");
  const auto c = parse_ok(tiny_config(dir.path / "out"));
  REQUIRE(cmd_synth(c) == kExitOk);
  const auto manifest = load_manifest(recordings_dir(c));
  CHECK(manifest.subjects.size() == 12);
  REQUIRE(cmd_preprocess(c) == kExitOk);
  REQUIRE(cmd_connectivity(c) == kExitOk);
  const auto m = load_connectivity(matrix_file(c, manifest.subjects[0].id, Session::pre, Metric::pdc));
  CHECK(m.matrix.values.rows() == 3);
  CHECK(m.matrix.channel_labels == std::vector<std::string>{"ch1", "ch2", "ch3"});
  CHECK(m.matrix.metric == Metric::pdc);

  // Fresh outputs are not recomputed.
  const auto before = mtimes(matrices_dir(c));
  REQUIRE(cmd_connectivity(c) == kExitOk);
  CHECK(mtimes(matrices_dir(c)) == before);

  REQUIRE(cmd_classify(c) == kExitOk);
  const json report = json::parse(read_file(c.run_dir() / "report.json"));
  CHECK(report["cells"].size() == 4);
  for (const auto& cell : report["cells"]) {
    CHECK_FALSE(cell.contains("error"));
    CHECK(cell["fold_accuracies"].size() == 3);
    CHECK(cell["confusion_matrix"].size() == 3);
  }
  CHECK(report["class_counts"]["low"] == 4);
  CHECK(fs::exists(c.run_dir() / "table.md"));
  CHECK(fs::exists(c.run_dir() / "hyperparameters.md"));
  const auto ds = load_dataset(c.run_dir() / "datasets" / "pdc.csv");
  CHECK(ds.n_rows() == 12);
  CHECK(ds.n_features() == 9);

  const std::string table = read_file(c.run_dir() / "table.md");
  fs::remove(c.run_dir() / "table.md");
  CHECK(cmd_report(c) == kExitOk);
  CHECK(read_file(c.run_dir() / "table.md") == table);
  CHECK(table.find("| MSC | RFE |") != std::string::npos);

  // Same seed in a second output root: byte-identical report.
  auto c2 = c;
  c2.out = dir.path / "out2";
  fs::create_directories(c2.run_dir());
  fs::copy(c.run_dir() / "matrices", c2.run_dir() / "matrices");
  fs::create_directories(recordings_dir(c2));
  fs::copy(recordings_dir(c) / "manifest.json", recordings_dir(c2) / "manifest.json");
  REQUIRE(cmd_classify(c2) == kExitOk);
  CHECK(read_file(c2.run_dir() / "report.json") == read_file(c.run_dir() / "report.json"));
}

TEST_CASE("per-subject failures are isolated") {
  TempDir dir("fail");
  const auto c = parse_ok(tiny_config(dir.path / "out"));
  REQUIRE(cmd_synth(c) == kExitOk);
  const auto manifest = load_manifest(recordings_dir(c));
  std::ofstream(recording_file(recordings_dir(c), manifest.subjects[1].id, Session::post)) << "garbage\n";
  CHECK(cmd_preprocess(c) == kExitRuntime);
  CHECK(fs::exists(preprocessed_dir(c) / fs::path(recording_file(recordings_dir(c), manifest.subjects[0].id,
                                                                 Session::pre)).filename()));
}

// eegconn: synthetic cohort generation, preprocessing, connectivity and
// classification driven by one JSON run configuration.

#include "eegconn/cli/commands.hpp"
#include "eegconn/cli/config.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  using namespace eegconn::cli;

  CLI::App app{"EEG functional-connectivity pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Run seed (overrides the config)");
  app.add_option("--out", out, "Output root directory (overrides the config)");
  app.add_option("--jobs", jobs, "Worker threads, 0 = all cores (overrides the config)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic pre/post cohort");
  auto* preprocess = app.add_subcommand("preprocess", "Filter and re-reference recordings");
  auto* connectivity = app.add_subcommand("connectivity", "Compute connectivity matrices");
  auto* classify = app.add_subcommand("classify", "Run the metric x selector x model crossing");
  auto* validate = app.add_subcommand("validate", "Check the config and estimate the work");
  auto* report = app.add_subcommand("report", "Render table.md from report.json");
  for (auto* sub : {synth, preprocess, connectivity, classify, validate, report}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  std::vector<Issue> issues;
  RunConfig config;
  if (!config_path.empty()) config = load_config(config_path, issues);
  if (seed) config.seed = *seed;
  if (out) config.out = *out;
  if (jobs) config.jobs = *jobs;

  if (validate->parsed()) return cmd_validate(config, issues);
  if (has_errors(issues)) {
    for (const auto& i : issues) {
      std::cerr << (i.warning ? "warning: " : "error: ") << (i.field.empty() ? "/" : i.field) << ": "
                << i.message << '\n';
    }
    return kExitInvalid;
  }
  try {
    if (synth->parsed()) return cmd_synth(config);
    if (preprocess->parsed()) return cmd_preprocess(config);
    if (connectivity->parsed()) return cmd_connectivity(config);
    if (classify->parsed()) return cmd_classify(config);
    if (report->parsed()) return cmd_report(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInvalid;
}

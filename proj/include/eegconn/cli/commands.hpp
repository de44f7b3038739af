#pragma once

#include "eegconn/cli/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace eegconn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

std::filesystem::path recordings_dir(const RunConfig& c);
std::filesystem::path preprocessed_dir(const RunConfig& c);
std::filesystem::path matrices_dir(const RunConfig& c);
std::filesystem::path datasets_dir(const RunConfig& c);
std::filesystem::path matrix_file(const RunConfig& c, const std::string& subject, Session session,
                                  Metric metric);

// Each command validates the config first (exit 1 on errors) and logs to
// stderr. Exit 2 means some work failed; completed outputs are kept.
int cmd_synth(const RunConfig& config);
int cmd_preprocess(const RunConfig& config);
int cmd_connectivity(const RunConfig& config);
int cmd_classify(const RunConfig& config);
/// Prints diagnostics for the config and any issues found while parsing it.
int cmd_validate(const RunConfig& config, const std::vector<Issue>& parse_issues);
/// Re-renders table.md and hyperparameters.md from report.json and prints
/// the table.
int cmd_report(const RunConfig& config);

/// Markdown table with metric+selector rows and model columns.
std::string render_table(const nlohmann::json& report);
std::string render_hyperparameters(const nlohmann::json& report);

}  // namespace eegconn::cli

#pragma once
// Experiment pipeline behind the CLI. Each command loads its prerequisite
// artifacts from the run directory, works through the library modules, and
// atomically writes its own artifacts, every one stamped with the hash of
// the effective configuration. Identical config and seeds reproduce every
// artifact byte for byte.

#include "scengen/config.hpp"
#include "scengen/dataio.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace scengen::pipeline {

// artifact locations under the run directory
std::string dataset_path(const std::string& out, dataio::Track track);
std::string checkpoint_path(const std::string& out, const std::string& model, dataio::Track track);
std::string scenario_path(const std::string& out, const std::string& model, dataio::Track track,
                          dataio::Split split);
std::string quality_days_path(const std::string& out, dataio::Track track);
std::string quality_summary_path(const std::string& out, dataio::Track track);
std::string quality_curves_path(const std::string& out, dataio::Track track);
std::string value_days_path(const std::string& out);
std::string value_campaign_path(const std::string& out);
std::string table_quality_path(const std::string& out);
std::string table_value_path(const std::string& out);

// scenario rows for one (model, day, zone): exactly M rows, finite values,
// ascending scenario_idx; log_density is empty unless the model supplies one
struct ScenarioBlock {
  std::string model;
  std::string day;
  int zone = 1;
  Eigen::MatrixXd scenarios;    // M x T
  Eigen::VectorXd log_density;  // M or empty
};

struct ScenarioFileData {
  std::map<std::string, std::string> meta;
  std::vector<ScenarioBlock> blocks;
};

void write_scenario_file(const std::string& path, const std::vector<ScenarioBlock>& blocks,
                         const std::map<std::string, std::string>& meta);
ScenarioFileData read_scenario_file(const std::string& path);

// zero columns re-inserted at the original indices removed during ingest
Eigen::MatrixXd pad_columns(const Eigen::MatrixXd& s, const std::vector<int>& removed,
                            int full_T);

void cmd_ingest(const config::Config& cfg);
void cmd_train(const config::Config& cfg);
void cmd_generate(const config::Config& cfg);
void cmd_eval_quality(const config::Config& cfg);
void cmd_eval_value(const config::Config& cfg);
void cmd_report(const config::Config& cfg);

// figure-data bundle (reliability, correlation, roc, quantile fan, dm grid)
// derived from the stored quality curves; one CSV per figure family
void emit_plot_data(const std::string& out, dataio::Track track);

// dispatches one of: ingest train generate eval-quality eval-value report
void run_command(const std::string& command, const config::Config& cfg);

}  // namespace scengen::pipeline

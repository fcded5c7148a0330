#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace ideg {

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct WorkflowResult {
  std::string subcommand;
  std::vector<Verdict> verdicts;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::filesystem::path> artifacts;
  double seconds = 0.0;

  bool pass() const noexcept;
};

/// check-coeff, hp, carleman-identity, carleman-scan, caccioppoli, observability,
/// null-control, all.
const std::vector<std::string>& subcommands();
bool is_subcommand(const std::string& name);

/// Runs one subcommand (or `all`) and writes its tables plus `<name>_summary.json` into
/// cfg.out_dir(). Throws ConfigError for unknown names and ideg::Error on failures that
/// prevent a verdict.
WorkflowResult run_workflow(const std::string& subcommand, const RunConfig& cfg);

/// {config, verdicts: [{name, pass, value, threshold}], timing, details}.
nlohmann::json summary_json(const WorkflowResult& result, const RunConfig& cfg);

/// One "PASS|FAIL name value threshold" line per verdict, then a totals line.
std::string summary_text(const WorkflowResult& result);

}  // namespace ideg

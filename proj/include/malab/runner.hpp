#ifndef MALAB_RUNNER_HPP
#define MALAB_RUNNER_HPP

#include "malab/config.hpp"
#include "malab/report.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace malab {

enum ExitCode : int { exit_pass = 0, exit_assertion = 1, exit_config = 2, exit_solver = 3 };

struct ExperimentOutput
{
  ExperimentReport report;
  /// Extra tables (file name, CSV text), e.g. solved fields.
  std::vector<std::pair<std::string, std::string>> tables;
};

/// Runs one non-suite experiment in memory. Throws InvalidArgument for
/// settings the experiment cannot use and SolverError on solver failure.
ExperimentOutput run_experiment(const ExperimentConfig& config);

struct RunResult
{
  int exit_code = exit_pass;
  std::vector<ExperimentReport> reports;
  std::vector<std::filesystem::path> files; ///< every file written
  std::string error;                        ///< set for exit codes 2 and 3
};

/// Writes report.json, <id>_sweep.csv, one <id>_<column>.dat per measured
/// column and the extra tables under `out`. A suite writes one subdirectory
/// per experiment plus summary.json. Exit code 1 iff some inequality failed;
/// 2 for settings rejected by an experiment; 3 for solver or I/O failures.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);

/// --out beats the MA_LAB_OUT environment variable, which beats the config.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out, const ExperimentConfig& config);

} // namespace malab

#endif

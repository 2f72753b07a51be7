#pragma once

#include <string>

#include "pathcalc/config.hpp"

namespace pathcalc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kNotConverged = 4,  // strict BK mode only
};

// Each runner writes under cfg.out:
//   meta.txt   JSON: effective config and a result summary
//   paths/     generated or input paths
//   results/   CSV outputs
// and returns kOk or kNotConverged; errors propagate as exceptions.
int run_simulate(const ExperimentConfig& cfg);
int run_integrate(const ExperimentConfig& cfg);
int run_qv(const ExperimentConfig& cfg);
int run_ito_check(const ExperimentConfig& cfg);
int run_derive(const ExperimentConfig& cfg);
int run_regularity(const ExperimentConfig& cfg);

/// Runs cfg.subcommand and maps exceptions to exit codes, reporting the
/// message on stderr.
int run(const ExperimentConfig& cfg);

/// Exit code for the exception currently being handled.
int exit_code_for_current_exception(std::string* message = nullptr);

}  // namespace pathcalc::cli

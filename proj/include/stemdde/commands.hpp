#pragma once

#include "stemdde/config.hpp"

#include <string>

namespace stemdde {

/// Exit codes shared by the CLI and the command layer.
/// 0 success / reached_T; 1 a check reported a fail verdict;
/// 2 configuration or precondition error; 3 domain_exit; 4 norm_blowup;
/// 5 inner_failure.
enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_config_error = 2,
    exit_domain_exit = 3,
    exit_norm_blowup = 4,
    exit_inner_failure = 5,
};

/// Run a simulation; writes <out_dir>/trajectory.csv with the termination
/// footer. Returns the exit code mapped from the termination status.
int cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

/// Run the condition checks (G, Lb for tau and F, S); writes
/// <out_dir>/report.txt and report.json. Exit 0 iff no fail verdicts.
int cmd_check(const RunConfig& cfg, const std::string& out_dir);

/// check_S alone; same report artifacts.
int cmd_derivcheck(const RunConfig& cfg, const std::string& out_dir);

/// Equilibrium table; prints to stdout and writes <out_dir>/equilibria.json.
int cmd_equilibria(const RunConfig& cfg, const std::string& out_dir);

} // namespace stemdde

#pragma once

#include <cstddef>
#include <string>

#include "jkoflow/config.hpp"

namespace jkoflow {

/// Outcome of a command: 0 or an ErrorCode value, plus the JSON summary that
/// was also written to the output directory.
struct CommandResult {
  int status = 0;
  std::string summary;
};

/// frames.csv, ledger.json, diagnostics.json and run.json. Status kStepFailure
/// when a step failed; the artifacts up to the failure are still written.
CommandResult cmd_run(const RunConfig& cfg, const std::string& out_dir);

/// One step from the initial density: step.csv and step.json.
CommandResult cmd_step(const RunConfig& cfg, const std::string& out_dir);

/// JKO against the finite-volume solver (and the stationary profile for the
/// log-linear case). With levels > 1, level j uses n 2^j, tau / 2^j and
/// fd_epsilon / 2^j. Writes compare.json and per-level frame files.
CommandResult cmd_compare(const RunConfig& cfg, const std::string& out_dir, std::size_t levels = 1);

/// Worst L1 contraction violation between two runs whose configs differ only
/// in initial data. Writes contraction.json.
CommandResult cmd_contraction(const RunConfig& a, const RunConfig& b, const std::string& out_dir);

/// `pairs` random initial pairs seeded from cfg.seed.
CommandResult cmd_contraction_random(const RunConfig& cfg, std::size_t pairs,
                                     const std::string& out_dir);

/// Assumption checks, decomposition exponent and one-sided data: entropy.json.
CommandResult cmd_validate_entropy(const RunConfig& cfg, const std::string& out_dir,
                                   std::size_t samples = 1000);

/// Analytic profile: stationary.csv and stationary.json.
CommandResult cmd_stationary(double l, std::size_t n, const std::string& out_dir);

/// Slack allowed by the contraction check on a grid of n cells over [0, l].
double contraction_slack(double l, std::size_t n);

}  // namespace jkoflow

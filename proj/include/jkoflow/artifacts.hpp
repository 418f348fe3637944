#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jkoflow/diagnostics.hpp"
#include "jkoflow/jko.hpp"
#include "jkoflow/stationary.hpp"

namespace jkoflow {

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

void write_text(const std::string& path, const std::string& text);

/// Flux column for a frame cell, given density and pressure.
using FluxColumn = std::function<double(double rho, double p)>;

/// `t,x,rho,p,ls` rows for every stored frame, preceded by a
/// `# fingerprint=` comment line.
std::string frames_csv(const Trajectory& traj, const FluxColumn& ls, const std::string& fingerprint);

/// {"fingerprint", "tau", "entries": [{k, t, energy, w2_step, dissipation_slack,
/// iterations, optimality_residual}], "failure"}.
std::string ledger_json(const Trajectory& traj, const std::string& fingerprint);

/// {"fingerprint", "checks": [{check_name, status, worst_value, location, tolerances}]}.
std::string diagnostics_json(const std::vector<DiagnosticEntry>& entries,
                             const std::string& fingerprint);

/// `x,rho,p_expected` at n cell centres.
std::string stationary_csv(const StationaryProfile& profile, std::size_t n,
                           const std::string& fingerprint);

}  // namespace jkoflow

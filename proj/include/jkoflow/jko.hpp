#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jkoflow/density.hpp"
#include "jkoflow/entropy.hpp"
#include "jkoflow/potential.hpp"

namespace jkoflow {

struct SolverOptions {
  enum class Method { Newton, Picard };

  Method method = Method::Newton;
  double damping = 0.5;
  int max_iters = 5000;
  double tol_fix = 1e-8;
  double tol_mass = 1e-12;
  double tol_phase = 1e-6;
};

struct JkoStepResult {
  GridDensity rho_new;
  std::vector<double> pressure;
  /// Kantorovich potential from rho_new to rho_prev, zero at the first centre.
  std::vector<double> potential;
  std::vector<double> velocity;
  double mass_constant = 0.0;
  double w2_step = 0.0;
  int iterations = 0;
  double optimality_residual = 0.0;
  double mass_residual = 0.0;
  /// "newton", "newton+continuation" or "picard".
  std::string method;
  /// C - g per cell; reused as a warm start for the next step.
  std::vector<double> multiplier;
};

/// h sum [S(rho_i) + Phi(x_i) rho_i].
double energy(const EntropySpec& spec, const Potential& phi, const GridDensity& rho);

/// Total mass h sum s'^-1(C - g_i) for a trial constant.
double mass_for_constant(const EntropySpec& spec, const std::vector<double>& g, double h, double c);

/// Constant C with h sum s'^-1(C - g_i) = 1, by bisection on a geometrically
/// grown bracket. Throws kNoSolution when no bracket is found or the best
/// constant misses unit mass by more than tol_mass.
double mass_constant(const EntropySpec& spec, const std::vector<double>& g, double h,
                     double tol_mass = 1e-12);

/// Largest distance from C - g_i to the subdifferential at rho_i. Cells where
/// rho_i = 0 and s'^-1(C - g_i) underflows to 0 count as satisfied.
double optimality_residual(const EntropySpec& spec, const GridDensity& rho,
                           const std::vector<double>& g, double c);

/// Error thrown by jko_step; carries the best iterate found.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, std::optional<JkoStepResult> best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const std::optional<JkoStepResult>& best() const { return best_; }

 private:
  std::optional<JkoStepResult> best_;
};

/// One minimizing-movement step from rho_prev. `warm_start` (C - g of the
/// previous step) seeds the Newton solver when its size matches.
JkoStepResult jko_step(const EntropySpec& spec, const Potential& phi, const GridDensity& rho_prev,
                       double tau, const SolverOptions& opts = {},
                       const std::vector<double>* warm_start = nullptr);

struct Frame {
  std::size_t k = 0;
  double t = 0.0;
  GridDensity rho;
  std::vector<double> pressure;
};

struct LedgerEntry {
  std::size_t k = 0;
  double t = 0.0;
  double energy = 0.0;
  double w2_step = 0.0;
  /// E(rho_{k-1}) - E(rho_k) - W2^2 / (2 tau); nonnegative for exact minimizers.
  double dissipation_slack = 0.0;
  int iterations = 0;
  double optimality_residual = 0.0;
};

struct TrajectoryFailure {
  std::size_t k = 0;
  std::string message;
  double residual = 0.0;
};

struct Trajectory {
  double tau = 0.0;
  std::vector<Frame> frames;
  /// Entry k = 0 holds the initial energy.
  std::vector<LedgerEntry> ledger;
  std::string fingerprint;
  std::optional<TrajectoryFailure> failure;
};

/// Pressure selected by the density alone: the branch endpoint off rho = 1 and
/// S'(1-) on it. Used for the initial frame, which carries no multiplier.
std::vector<double> default_pressure(const EntropySpec& spec, const GridDensity& rho);

/// Runs horizon / tau steps. Every `frames_every`-th frame and the last one are
/// stored; the ledger records every step. Step failures truncate the
/// trajectory and are recorded, not thrown.
Trajectory run_trajectory(const EntropySpec& spec, const Potential& phi, const GridDensity& rho0,
                          double tau, double horizon, const SolverOptions& opts = {},
                          std::size_t frames_every = 1);

/// Number of steps N with N tau = horizon; throws kInvalidArgument otherwise.
std::size_t step_count(double tau, double horizon);

}  // namespace jkoflow

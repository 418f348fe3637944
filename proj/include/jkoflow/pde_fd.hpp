#pragma once

#include "jkoflow/density.hpp"
#include "jkoflow/entropy.hpp"
#include "jkoflow/jko.hpp"
#include "jkoflow/potential.hpp"

namespace jkoflow {

/// Monotone C^1 regularisation of rho S'(rho) - S(rho) + S(1): exact outside
/// [1 - eps, 1 + eps], cubic Hermite inside.
class RegularizedFlux {
 public:
  /// Throws kInvalidArgument when the Hermite piece would not be monotone.
  RegularizedFlux(const EntropySpec& spec, double epsilon);

  double value(double rho) const;
  double derivative(double rho) const;
  /// Largest derivative over [0, rho_max].
  double max_derivative(double rho_max) const;
  double epsilon() const { return eps_; }

 private:
  const EntropySpec* spec_;
  double eps_, a_, b_;
  double fa_, fb_, da_, db_;
  double c_[4];
  bool linear_ = false;
};

struct FdOptions {
  double epsilon = 1e-2;
  /// 0 selects the largest step allowed by the stability bound.
  double dt = 0.0;
  /// Frames are stored every `frame_interval` time units (0: first and last only).
  double frame_interval = 0.0;
};

struct FdResult {
  /// Frames carry NaN pressure; the ledger stays empty.
  Trajectory trajectory;
  double dt = 0.0;
  std::size_t steps = 0;
  double max_mass_error = 0.0;
};

/// Largest explicit step satisfying both stability bounds and monotonicity:
/// 0.45 / (A / h^2 + V / h) with A = max flux', V = max |Phi'|.
double fd_stable_dt(double h, double max_flux_derivative, double max_drift);

/// Explicit conservative scheme for d_t rho = d_x(d_x flux_eps(rho) + Phi' rho):
/// centred diffusion, upwind drift, zero flux at both ends. Throws
/// kCflViolation when the density outgrows the range used to pick dt.
FdResult fd_run(const EntropySpec& spec, const Potential& phi, const GridDensity& rho0,
                double horizon, const FdOptions& opts = {});

}  // namespace jkoflow

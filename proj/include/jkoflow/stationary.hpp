#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jkoflow/density.hpp"
#include "jkoflow/entropy.hpp"
#include "jkoflow/potential.hpp"

namespace jkoflow {

/// Stationary density of the log-log entropy with Phi(x) = 2x on [0, l].
class StationaryProfile {
 public:
  enum class Regime { ThreePhase, TwoPhase, Pure };

  double l() const { return l_; }
  Regime regime() const { return regime_; }
  /// Breakpoint A (for Pure, the value with rho = e^(A - x)).
  double breakpoint() const { return a_; }
  /// [A, A + 1/2] or [A, l]; empty for Pure.
  std::optional<std::pair<double, double>> plateau() const;
  /// Constant of the affine pressure C - 2x on the plateau.
  double pressure_constant() const { return 2.0 + 2.0 * a_; }

  double density(double x) const;
  /// clamp(C - 2x, 1, 2).
  double pressure(double x) const;
  /// Exact integral of the density over [x0, x1].
  double integral(double x0, double x1) const;
  /// Exact cell averages on a uniform grid of n cells.
  GridDensity cell_averages(std::size_t n) const;

 private:
  friend StationaryProfile stationary_log_linear(double l);
  double antiderivative(double x) const;

  double l_ = 1.0;
  Regime regime_ = Regime::Pure;
  double a_ = 0.0;
};

std::string to_string(StationaryProfile::Regime regime);

/// ln(3/2) + 1/2 and ln 2.
double three_phase_threshold();
double two_phase_threshold();

StationaryProfile stationary_log_linear(double l);

/// Largest |total flux| (d_x L_S(rho, p) + Phi' rho) over interior faces.
/// With closed ends a density is stationary exactly when this flux vanishes.
double stationary_residual(const EntropySpec& spec, const Potential& phi, const GridDensity& rho,
                           const std::vector<double>& p);

}  // namespace jkoflow

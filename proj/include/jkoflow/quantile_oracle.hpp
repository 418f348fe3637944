#pragma once

#include <cstddef>
#include <vector>

#include "jkoflow/density.hpp"
#include "jkoflow/entropy.hpp"
#include "jkoflow/potential.hpp"

namespace jkoflow {

/// C^2 version of S that agrees with S outside [1 - eps, 1 + eps]. Inside
/// the window S' blends the two tangent lines at the window ends with a
/// quintic smoothstep plus a bump that restores S(1 + eps).
class SmoothedEntropy {
 public:
  SmoothedEntropy(const EntropySpec& spec, double epsilon);

  double value(double rho) const;
  double derivative(double rho) const;
  double second_derivative(double rho) const;
  double epsilon() const { return eps_; }

 private:
  double window_derivative(double rho) const;
  double window_second(double rho) const;

  const EntropySpec* spec_;
  double eps_;
  double a_, b_;                      // window ends
  double s_a_, sp_a_, spp_a_, sp_b_, spp_b_;
  double bump_;                       // weight of the correcting bump
};

/// Lagrangian form of one minimizing-movement step. Nodes X_0 <= ... <= X_N
/// bound N intervals of mass 1/N each; the density is piecewise constant
/// between nodes and the quantile is piecewise linear in the mass variable.
class QuantileProblem {
 public:
  QuantileProblem(const EntropySpec& spec, const Potential& phi, const GridDensity& prev,
                  double tau, double epsilon, std::size_t n_particles);

  std::size_t particles() const { return n_; }
  /// Quantiles of the previous density at s = i / N.
  const std::vector<double>& reference_nodes() const { return y_; }

  /// +inf when any gap is nonpositive or a node leaves [0, l].
  double objective(const std::vector<double>& x) const;
  std::vector<double> gradient(const std::vector<double>& x) const;
  /// Tridiagonal Hessian (diag, off-diag).
  void hessian(const std::vector<double>& x, std::vector<double>& diag,
               std::vector<double>& off) const;

  double l() const { return l_; }

 private:
  double gap_energy(double gap) const;
  double gap_derivative(double gap) const;
  double gap_second(double gap) const;

  SmoothedEntropy s_;
  const Potential* phi_;
  double l_, tau_;
  std::size_t n_;
  std::vector<double> y_;
  std::vector<double> load_;   // int Y psi_i ds
  double y_square_ = 0.0;      // int Y^2 ds
};

struct OracleResult {
  GridDensity density;
  std::vector<double> nodes;
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
};

/// Minimises the Lagrangian objective by projected Newton steps (bounds
/// X_0 >= 0, X_N <= l, positive gaps) until the free gradient is <= 1e-9,
/// then bins the result onto the grid of `prev`.
OracleResult step_oracle_quantile(const EntropySpec& spec, const Potential& phi,
                                  const GridDensity& prev, double tau, double epsilon,
                                  std::size_t n_particles);

/// Density with piecewise-constant values between the nodes, averaged over
/// the cells of a uniform grid on [0, l] with n cells.
GridDensity bin_nodes(const std::vector<double>& nodes, double l, std::size_t n);

}  // namespace jkoflow

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jkoflow {

/// Nonnegative cell averages on a uniform grid over [0, l] with unit mass.
class GridDensity {
 public:
  /// Throws kInvalidArgument on negative/non-finite values or a mass that is
  /// not 1 within 1e-10.
  GridDensity(double l, std::vector<double> values);
  /// Rescales `values` to unit mass; `factor` receives the applied scale.
  static GridDensity normalized(double l, std::vector<double> values, double* factor = nullptr);
  static GridDensity uniform(double l, std::size_t n);

  double l() const { return l_; }
  std::size_t n() const { return values_.size(); }
  double h() const { return l_ / static_cast<double>(values_.size()); }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * h(); }
  double face(std::size_t i) const { return static_cast<double>(i) * h(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double mass() const;
  double max() const;

  /// CDF at the n + 1 faces, normalised so that the last entry is exactly 1.
  const std::vector<double>& cdf() const { return cdf_; }
  /// Mass to the right of each face, accumulated from the right end so that
  /// tails near F = 1 keep full relative precision.
  const std::vector<double>& survival() const { return sf_; }

 private:
  double l_;
  std::vector<double> values_;
  std::vector<double> cdf_;
  std::vector<double> sf_;
};

/// Left-continuous inverse of the piecewise-linear CDF. s = 0 maps to the
/// left edge of the support.
double quantile(const GridDensity& rho, double s);
/// Quantile at level 1 - u, resolved from the survival function.
double upper_quantile(const GridDensity& rho, double u);

/// Exact W2 between the piecewise-constant reconstructions (closed-form
/// integration of the squared quantile difference segment by segment).
double wasserstein2_squared(const GridDensity& rho, const GridDensity& nu);
double wasserstein2(const GridDensity& rho, const GridDensity& nu);

struct TransportData {
  /// T = Q_nu o F_rho at cell centres; NaN on cells where rho vanishes.
  std::vector<double> map_values;
  /// phi with phi' = x - T, phi(first centre) = 0.
  std::vector<double> potential_values;
  double w2 = 0.0;
};

TransportData kantorovich(const GridDensity& rho, const GridDensity& nu);

/// Displacement x - T(x) at cell centres with T continued monotonically
/// (constant) across cells where rho vanishes.
std::vector<double> displacement(const GridDensity& rho, const GridDensity& nu);

/// (h sum |rho_i - nu_i|^p)^(1/p); p = +inf gives the max norm.
double lp_distance(const GridDensity& rho, const GridDensity& nu, double p);

struct LoadedDensity {
  GridDensity density;
  double normalization_factor;
};

/// Reads a `x,rho` CSV of cell centres; the domain length is inferred from
/// the centres and the mass renormalised to 1.
LoadedDensity load_density_csv(const std::string& path);

}  // namespace jkoflow

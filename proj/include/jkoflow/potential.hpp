#pragma once

#include <string>
#include <vector>

namespace jkoflow {

/// External potential Phi on [0, l]. Tables are interpolated linearly.
class Potential {
 public:
  enum class Kind { Zero, Linear, Quadratic, Table };

  static Potential zero();
  static Potential linear(double slope);
  /// c0 + c1 x + c2 x^2.
  static Potential quadratic(double c0, double c1, double c2);
  /// Throws kInvalidArgument unless xs is strictly increasing and all
  /// finite-difference slopes are finite and bounded.
  static Potential table(std::vector<double> xs, std::vector<double> values);
  /// CSV with header `x,phi`.
  static Potential load_table(const std::string& path);

  Kind kind() const { return kind_; }
  double value(double x) const;
  double derivative(double x) const;
  bool is_constant() const;
  /// Largest |Phi'| over [0, l].
  double lipschitz(double l) const;
  /// Inward-pointing gradient at both ends: Phi'(0) < 0 and Phi'(l) > 0.
  bool boundary_condition_holds(double l) const;

  std::vector<double> sample_centers(double l, std::size_t n) const;

  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<double>& table_x() const { return xs_; }
  const std::vector<double>& table_values() const { return vals_; }

 private:
  Kind kind_ = Kind::Zero;
  std::vector<double> coeffs_{0.0, 0.0, 0.0};
  std::vector<double> xs_, vals_;
};

}  // namespace jkoflow

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace jkoflow {

enum class Family { LogLog, LogPow, PowPowEqual, PowPow, Custom };

std::string to_string(Family family);

/// Closed interval of extended reals; lo may be -inf.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double distance(double v) const {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
  }
  bool is_singleton() const { return lo == hi; }
};

/// Breakpoints of S' for a user-defined entropy. Rows with rho < 1 define the
/// left branch, rows with rho > 1 the right branch; the declared one-sided
/// values close each branch at rho = 1.
struct CustomTable {
  std::vector<double> rho;
  std::vector<double> s_prime;
  double s_prime_1_minus = 0.0;
  double s_prime_1_plus = 0.0;
  double s_at_1 = 0.0;
  // Growth exponents used when validating; the sigma constants are fitted.
  double m = 2.0;
  double r = 2.0;
};

/// Loads `s_prime_1_minus=`, `s_prime_1_plus=`, `s_at_1=` preamble lines
/// followed by a `rho,s_prime` CSV block.
CustomTable load_custom_table(const std::string& path);
CustomTable parse_custom_table(const std::string& text, const std::string& source);

/// A convex entropy S with a kink at rho = 1.
///
/// Built-in families carry analytically computed growth constants; custom
/// tables interpolate S' piecewise linearly and integrate S exactly from the
/// anchor S(1).
class EntropySpec {
 public:
  static EntropySpec log_log();
  static EntropySpec log_pow(double m);
  static EntropySpec pow_pow_equal(double m);
  static EntropySpec pow_pow(double m, double r);
  static EntropySpec custom(CustomTable table);

  Family family() const { return family_; }
  /// Family parameters as given (m for LogPow/PowPowEqual, (m, r) for PowPow).
  double family_m() const { return family_m_; }
  double family_r() const { return family_r_; }

  /// Growth exponent and constant on (0,1): rho^(m-2)/sigma2 <= S''.
  double m() const { return m_; }
  double sigma2() const { return sigma2_; }
  /// Growth exponent and constant on (1,inf): rho^(r-2)/sigma1 <= S'' <= sigma1 rho^(r-2).
  double r() const { return r_; }
  double sigma1() const { return sigma1_; }

  /// S'(0+); -inf for the logarithmic families.
  double s_prime_0() const { return s_prime_0_; }
  double s_prime_1_minus() const { return s_prime_1_minus_; }
  double s_prime_1_plus() const { return s_prime_1_plus_; }
  double s_at_1() const { return s_at_1_; }
  bool positivity_expected() const { return s_prime_0_ == -std::numeric_limits<double>::infinity(); }

  /// S(rho); throws kDomain for negative rho.
  double value(double rho) const;
  /// S'(rho) for rho > 0; at rho == 1 returns the left derivative.
  double derivative(double rho) const;
  /// S''(rho) for rho > 0, rho != 1; at rho == 1 returns the left value.
  double second_derivative(double rho) const;

  /// The two smooth branches, continued past rho = 1 where a closed form
  /// exists (linear continuation of S' otherwise).
  double left_branch_derivative(double rho) const;
  double right_branch_derivative(double rho) const;

  Interval subdifferential(double rho) const;
  /// Monotone inverse of S' with the kink interval mapped to 1 and
  /// everything at or below S'(0+) mapped to 0.
  double generalized_inverse(double v) const;
  /// Derivative of generalized_inverse; zero on the plateau and below S'(0+).
  /// At the plateau endpoints the outer one-sided derivative is returned.
  double generalized_inverse_derivative(double v) const;

  /// rho S'(rho) - S(rho) + S(1) off rho = 1; on rho = 1 the left limit.
  double flux(double rho) const;
  /// Derivative of flux: rho S''(rho).
  double flux_derivative(double rho) const;

  /// The effective flux operator; throws kConstraintViolation when p is not
  /// the pressure selected by rho.
  double l_s(double rho, double p) const;
  /// True when (rho, p) satisfies the pressure constraints within `tol`.
  bool pressure_consistent(double rho, double p, double tol = 0.0) const;

  const std::optional<CustomTable>& table() const { return table_; }

 private:
  EntropySpec() = default;
  double custom_value(double rho) const;
  double custom_derivative(double rho, bool left_at_one) const;
  double custom_second(double rho) const;
  double custom_inverse(double v) const;

  Family family_ = Family::LogLog;
  double family_m_ = 1.0;
  double family_r_ = 1.0;
  double m_ = 1.0;
  double r_ = 1.0;
  double sigma1_ = 1.0;
  double sigma2_ = 1.0;
  double s_prime_0_ = 0.0;
  double s_prime_1_minus_ = 0.0;
  double s_prime_1_plus_ = 0.0;
  double s_at_1_ = 0.0;

  // Custom: knots of each branch (including rho = 1) with S' values and
  // cumulative integrals of S' measured from rho = 1.
  std::optional<CustomTable> table_;
  std::vector<double> left_knots_, left_sp_, left_int_;
  std::vector<double> right_knots_, right_sp_, right_int_;
};

/// Smooth-part splitting S = S_a + S_b with S_b continuously differentiable
/// and S_b'(1) = 0. Logarithmic families use S_a = S'(1-/+) rho log rho, the
/// others S_a = S'(1-/+) (rho^l - 1) / l.
class EntropyDecomposition {
 public:
  enum class Form { Log, Power };

  EntropyDecomposition(const EntropySpec& spec, double l_exponent);

  Form form() const { return form_; }
  double l_exponent() const { return l_; }

  double s_a(double rho) const;
  double s_a_derivative(double rho) const;
  double s_b(double rho) const;
  double s_b_derivative(double rho) const;
  double s_b_second_derivative(double rho) const;

  /// L_S evaluated through the splitting identity.
  double l_s(double rho, double p) const;

 private:
  double coefficient(double rho) const;

  const EntropySpec* spec_;
  Form form_;
  double l_;
};

/// Integrability exponent of iterates; +inf on the line.
double summability_beta(int dimension, double r);
/// Default splitting exponent min(2, (1 + beta) / 2).
double default_l_exponent(double beta);

EntropyDecomposition decompose(const EntropySpec& spec, double l_exponent);

enum class CheckStatus { Pass, Inconclusive, Fail };
std::string to_string(CheckStatus status);

struct AssumptionCheck {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double worst_margin = 0.0;
  double at_rho = 0.0;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool positivity_expected = false;
  double m = 1.0, r = 1.0, sigma1 = 1.0, sigma2 = 1.0;

  bool passed() const;
  const AssumptionCheck* find(const std::string& name) const;
};

/// Sampled checks of convexity, continuity at 1, superlinearity and the two
/// growth sandwiches on log-spaced grids over (1e-6, 1) and (1, 1e3).
ValidationReport validate_assumptions(const EntropySpec& spec, std::size_t samples);

}  // namespace jkoflow

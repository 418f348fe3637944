#include "jkoflow/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jkoflow/error.hpp"

namespace jkoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kConsistencyTol = 1e-12;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kIo, where + ": not a number: '" + text + "'");
}

// Linear interpolation of S' over sorted knots with linear extrapolation
// beyond both ends.
double interp(const std::vector<double>& x, const std::vector<double>& y, double at) {
  const std::size_t n = x.size();
  if (n == 1) return y[0];
  std::size_t k = 0;
  if (at >= x[n - 1]) {
    k = n - 2;
  } else if (at > x[0]) {
    k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), at) - x.begin()) - 1;
  }
  const double slope = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
  return y[k] + slope * (at - x[k]);
}

double interp_slope(const std::vector<double>& x, const std::vector<double>& y, double at) {
  const std::size_t n = x.size();
  if (n == 1) return 0.0;
  std::size_t k = 0;
  if (at >= x[n - 1]) {
    k = n - 2;
  } else if (at > x[0]) {
    k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), at) - x.begin()) - 1;
  }
  return (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
}

// Integral of the piecewise-linear interpolant between a and b (a <= b).
double interp_integral(const std::vector<double>& x, const std::vector<double>& y, double a,
                       double b) {
  std::vector<double> cuts{a};
  for (double k : x)
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    // Midpoint rule is exact on each linear piece.
    total += (hi - lo) * interp(x, y, 0.5 * (lo + hi));
  }
  return total;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::LogLog: return "LogLog";
    case Family::LogPow: return "LogPow";
    case Family::PowPowEqual: return "PowPowEqual";
    case Family::PowPow: return "PowPow";
    case Family::Custom: return "Custom";
  }
  return "?";
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Inconclusive: return "inconclusive";
    case CheckStatus::Fail: return "fail";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Construction

EntropySpec EntropySpec::log_log() {
  EntropySpec s;
  s.family_ = Family::LogLog;
  s.m_ = 1.0;
  s.sigma2_ = 1.0;  // rho S'' = 1 on (0,1)
  s.r_ = 1.0;
  s.sigma1_ = 2.0;  // rho S'' = 2 on (1,inf)
  s.s_prime_0_ = -kInf;
  s.s_prime_1_minus_ = 1.0;
  s.s_prime_1_plus_ = 2.0;
  s.s_at_1_ = 0.0;
  return s;
}

EntropySpec EntropySpec::log_pow(double m) {
  require(m > 1.0 && std::isfinite(m), ErrorCode::kInvalidArgument, "LogPow requires m > 1");
  EntropySpec s;
  s.family_ = Family::LogPow;
  s.family_m_ = m;
  s.m_ = 1.0;
  s.sigma2_ = 1.0;
  s.r_ = m;
  s.sigma1_ = m;  // S'' = m rho^(m-2) on (1,inf)
  s.s_prime_0_ = -kInf;
  s.s_prime_1_minus_ = 1.0;
  s.s_prime_1_plus_ = m / (m - 1.0);
  s.s_at_1_ = 0.0;
  return s;
}

EntropySpec EntropySpec::pow_pow_equal(double m) {
  require(m > 1.0 && std::isfinite(m), ErrorCode::kInvalidArgument,
          "PowPowEqual requires m > 1");
  EntropySpec s;
  s.family_ = Family::PowPowEqual;
  s.family_m_ = m;
  s.m_ = m;
  s.sigma2_ = 1.0 / m;  // S'' = m rho^(m-2) on (0,1)
  s.r_ = m;
  s.sigma1_ = std::max(1.0, 2.0 * m);  // S'' = 2m rho^(m-2) on (1,inf)
  s.s_prime_0_ = 0.0;
  s.s_prime_1_minus_ = m / (m - 1.0);
  s.s_prime_1_plus_ = 2.0 * m / (m - 1.0);
  s.s_at_1_ = 1.0 / (m - 1.0);
  return s;
}

EntropySpec EntropySpec::pow_pow(double m, double r) {
  require(std::isfinite(m) && std::isfinite(r) && m > r && r > 1.0,
          ErrorCode::kInvalidArgument, "PowPow requires m > r > 1");
  EntropySpec s;
  s.family_ = Family::PowPow;
  s.family_m_ = m;
  s.family_r_ = r;
  s.m_ = m;
  s.sigma2_ = 1.0 / m;
  s.r_ = r;
  s.sigma1_ = std::max(r, 1.0 / r);
  s.s_prime_0_ = 0.0;
  s.s_prime_1_minus_ = m / (m - 1.0);
  s.s_prime_1_plus_ = r / (r - 1.0);
  s.s_at_1_ = 1.0 / (m - 1.0);
  return s;
}

EntropySpec EntropySpec::custom(CustomTable table) {
  require(table.rho.size() == table.s_prime.size(), ErrorCode::kInvalidArgument,
          "custom entropy: rho and s_prime columns differ in length");
  for (std::size_t i = 0; i < table.rho.size(); ++i) {
    require(std::isfinite(table.rho[i]) && std::isfinite(table.s_prime[i]) && table.rho[i] > 0.0,
            ErrorCode::kInvalidArgument, "custom entropy: row " + std::to_string(i + 1) +
                                             " must have finite rho > 0 and finite s_prime");
    require(table.rho[i] != 1.0, ErrorCode::kInvalidArgument,
            "custom entropy: row " + std::to_string(i + 1) +
                " has rho = 1; one-sided values belong in the preamble");
    if (i > 0)
      require(table.rho[i] > table.rho[i - 1], ErrorCode::kInvalidArgument,
              "custom entropy: rho column must be strictly increasing (row " +
                  std::to_string(i + 1) + ")");
  }
  require(std::isfinite(table.s_prime_1_minus) && std::isfinite(table.s_prime_1_plus) &&
              std::isfinite(table.s_at_1),
          ErrorCode::kInvalidArgument, "custom entropy: one-sided values must be finite");
  require(table.m >= 1.0 && table.r >= 1.0, ErrorCode::kInvalidArgument,
          "custom entropy: growth exponents must be >= 1");

  EntropySpec s;
  s.family_ = Family::Custom;
  s.s_prime_1_minus_ = table.s_prime_1_minus;
  s.s_prime_1_plus_ = table.s_prime_1_plus;
  s.s_at_1_ = table.s_at_1;
  s.m_ = table.m;
  s.r_ = table.r;
  for (std::size_t i = 0; i < table.rho.size(); ++i) {
    if (table.rho[i] < 1.0) {
      s.left_knots_.push_back(table.rho[i]);
      s.left_sp_.push_back(table.s_prime[i]);
    }
  }
  s.left_knots_.push_back(1.0);
  s.left_sp_.push_back(table.s_prime_1_minus);
  s.right_knots_.push_back(1.0);
  s.right_sp_.push_back(table.s_prime_1_plus);
  for (std::size_t i = 0; i < table.rho.size(); ++i) {
    if (table.rho[i] > 1.0) {
      s.right_knots_.push_back(table.rho[i]);
      s.right_sp_.push_back(table.s_prime[i]);
    }
  }
  s.left_int_.resize(s.left_knots_.size());
  for (std::size_t k = 0; k < s.left_knots_.size(); ++k)
    s.left_int_[k] = interp_integral(s.left_knots_, s.left_sp_, s.left_knots_[k], 1.0);
  s.right_int_.resize(s.right_knots_.size());
  for (std::size_t k = 0; k < s.right_knots_.size(); ++k)
    s.right_int_[k] = interp_integral(s.right_knots_, s.right_sp_, 1.0, s.right_knots_[k]);
  s.s_prime_0_ = interp(s.left_knots_, s.left_sp_, 0.0);
  s.table_ = std::move(table);

  // Tightest growth constants over a log-spaced sample grid.
  double sigma2 = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const double rho = 1e-6 * std::pow(1e6, (j + 0.5) / 1000.0);
    const double d2 = s.custom_second(rho);
    sigma2 = d2 > 0.0 ? std::max(sigma2, std::pow(rho, s.m_ - 2.0) / d2) : kInf;
  }
  double sigma1 = 1.0;
  for (int j = 0; j < 1000; ++j) {
    const double rho = std::pow(1e3, (j + 0.5) / 1000.0);
    const double d2 = s.custom_second(rho);
    const double scale = std::pow(rho, s.r_ - 2.0);
    sigma1 = d2 > 0.0 ? std::max({sigma1, d2 / scale, scale / d2}) : kInf;
  }
  s.sigma2_ = sigma2;
  s.sigma1_ = sigma1;
  return s;
}

CustomTable parse_custom_table(const std::string& text, const std::string& source) {
  CustomTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_minus = false, have_plus = false, have_s1 = false, have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(line.substr(0, eq));
        const double v = parse_double(trim(line.substr(eq + 1)), where);
        if (key == "s_prime_1_minus") {
          t.s_prime_1_minus = v;
          have_minus = true;
        } else if (key == "s_prime_1_plus") {
          t.s_prime_1_plus = v;
          have_plus = true;
        } else if (key == "s_at_1") {
          t.s_at_1 = v;
          have_s1 = true;
        } else if (key == "m") {
          t.m = v;
        } else if (key == "r") {
          t.r = v;
        } else {
          throw Error(ErrorCode::kIo, where + ": unknown preamble key '" + key + "'");
        }
        continue;
      }
      std::string header;
      for (char c : line)
        if (c != ' ' && c != '\t') header += c;
      if (header != "rho,s_prime")
        throw Error(ErrorCode::kIo, where + ": expected header 'rho,s_prime'");
      have_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kIo, where + ": expected 'rho,s_prime'");
    t.rho.push_back(parse_double(trim(line.substr(0, comma)), where));
    t.s_prime.push_back(parse_double(trim(line.substr(comma + 1)), where));
  }
  if (!have_minus || !have_plus || !have_s1)
    throw Error(ErrorCode::kIo,
                source + ": preamble must define s_prime_1_minus, s_prime_1_plus and s_at_1");
  if (!have_header) throw Error(ErrorCode::kIo, source + ": missing 'rho,s_prime' header");
  return t;
}

CustomTable load_custom_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open entropy table '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_custom_table(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Custom table evaluation

double EntropySpec::custom_value(double rho) const {
  if (rho <= 1.0) {
    const auto& x = left_knots_;
    std::size_t k = 0;
    while (k + 1 < x.size() && x[k] < rho) ++k;
    // x[k] >= rho (or k is the last knot); integrate from rho up to x[k].
    const double partial = interp_integral(x, left_sp_, rho, x[k]);
    return s_at_1_ - (left_int_[k] + partial);
  }
  const auto& x = right_knots_;
  std::size_t k = x.size() - 1;
  while (k > 0 && x[k] > rho) --k;
  const double partial = interp_integral(x, right_sp_, x[k], rho);
  return s_at_1_ + right_int_[k] + partial;
}

double EntropySpec::custom_derivative(double rho, bool left_at_one) const {
  if (rho < 1.0 || (rho == 1.0 && left_at_one)) return interp(left_knots_, left_sp_, rho);
  return interp(right_knots_, right_sp_, rho);
}

double EntropySpec::custom_second(double rho) const {
  if (rho <= 1.0) return interp_slope(left_knots_, left_sp_, std::min(rho, 1.0 - 1e-300));
  return interp_slope(right_knots_, right_sp_, rho);
}

double EntropySpec::custom_inverse(double v) const {
  // Left branch: v in (S'(0+), S'(1-)).
  if (v < s_prime_1_minus_) {
    std::vector<double> x{0.0};
    std::vector<double> y{s_prime_0_};
    x.insert(x.end(), left_knots_.begin(), left_knots_.end());
    y.insert(y.end(), left_sp_.begin(), left_sp_.end());
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      if (v <= y[k + 1]) {
        const double dy = y[k + 1] - y[k];
        if (dy <= 0.0) return x[k];
        return std::clamp(x[k] + (v - y[k]) * (x[k + 1] - x[k]) / dy, x[k], x[k + 1]);
      }
    }
    return 1.0;
  }
  const auto& x = right_knots_;
  const auto& y = right_sp_;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (v <= y[k + 1]) {
      const double dy = y[k + 1] - y[k];
      if (dy <= 0.0) return x[k];
      return std::clamp(x[k] + (v - y[k]) * (x[k + 1] - x[k]) / dy, x[k], x[k + 1]);
    }
  }
  const double slope = interp_slope(x, y, x.back() + 1.0);
  if (slope <= 0.0) return kInf;
  return x.back() + (v - y.back()) / slope;
}

// ---------------------------------------------------------------------------
// Evaluation

double EntropySpec::value(double rho) const {
  require(rho >= 0.0 && !std::isnan(rho), ErrorCode::kDomain,
          "entropy evaluated at negative density");
  const double m = family_m_, r = family_r_;
  switch (family_) {
    case Family::LogLog:
      return rho <= 1.0 ? xlogx(rho) : 2.0 * xlogx(rho);
    case Family::LogPow:
      return rho <= 1.0 ? xlogx(rho) : (std::pow(rho, m) - 1.0) / (m - 1.0);
    case Family::PowPowEqual:
      return rho <= 1.0 ? std::pow(rho, m) / (m - 1.0)
                        : (2.0 * std::pow(rho, m) - 1.0) / (m - 1.0);
    case Family::PowPow:
      return rho <= 1.0 ? std::pow(rho, m) / (m - 1.0)
                        : std::pow(rho, r) / (r - 1.0) + 1.0 / (m - 1.0) - 1.0 / (r - 1.0);
    case Family::Custom:
      return custom_value(rho);
  }
  return 0.0;
}

double EntropySpec::left_branch_derivative(double rho) const {
  const double m = family_m_;
  switch (family_) {
    case Family::LogLog:
    case Family::LogPow:
      return 1.0 + std::log(rho);
    case Family::PowPowEqual:
    case Family::PowPow:
      return m * std::pow(rho, m - 1.0) / (m - 1.0);
    case Family::Custom:
      return interp(left_knots_, left_sp_, rho);
  }
  return 0.0;
}

double EntropySpec::right_branch_derivative(double rho) const {
  const double m = family_m_, r = family_r_;
  switch (family_) {
    case Family::LogLog:
      return 2.0 * (1.0 + std::log(rho));
    case Family::LogPow:
      return m * std::pow(rho, m - 1.0) / (m - 1.0);
    case Family::PowPowEqual:
      return 2.0 * m * std::pow(rho, m - 1.0) / (m - 1.0);
    case Family::PowPow:
      return r * std::pow(rho, r - 1.0) / (r - 1.0);
    case Family::Custom:
      return interp(right_knots_, right_sp_, rho);
  }
  return 0.0;
}

double EntropySpec::derivative(double rho) const {
  require(rho > 0.0, ErrorCode::kDomain, "S' requires a positive density");
  return rho <= 1.0 ? left_branch_derivative(rho) : right_branch_derivative(rho);
}

double EntropySpec::second_derivative(double rho) const {
  require(rho > 0.0, ErrorCode::kDomain, "S'' requires a positive density");
  const double m = family_m_, r = family_r_;
  const bool left = rho <= 1.0;
  switch (family_) {
    case Family::LogLog:
      return (left ? 1.0 : 2.0) / rho;
    case Family::LogPow:
      return left ? 1.0 / rho : m * std::pow(rho, m - 2.0);
    case Family::PowPowEqual:
      return (left ? 1.0 : 2.0) * m * std::pow(rho, m - 2.0);
    case Family::PowPow:
      return left ? m * std::pow(rho, m - 2.0) : r * std::pow(rho, r - 2.0);
    case Family::Custom:
      return custom_second(rho);
  }
  return 0.0;
}

Interval EntropySpec::subdifferential(double rho) const {
  require(rho >= 0.0 && !std::isnan(rho), ErrorCode::kDomain,
          "subdifferential at negative density");
  if (rho == 0.0) return {-kInf, s_prime_0_};
  if (rho == 1.0) return {s_prime_1_minus_, s_prime_1_plus_};
  const double d = derivative(rho);
  return {d, d};
}

double EntropySpec::generalized_inverse(double v) const {
  if (std::isnan(v)) throw Error(ErrorCode::kDomain, "generalized inverse of NaN");
  if (v <= s_prime_0_) return 0.0;
  if (v >= s_prime_1_minus_ && v <= s_prime_1_plus_) return 1.0;
  const double m = family_m_, r = family_r_;
  const bool left = v < s_prime_1_minus_;
  switch (family_) {
    case Family::LogLog:
      return left ? std::exp(v - 1.0) : std::exp(0.5 * v - 1.0);
    case Family::LogPow:
      return left ? std::exp(v - 1.0) : std::pow((m - 1.0) * v / m, 1.0 / (m - 1.0));
    case Family::PowPowEqual:
      return left ? std::pow((m - 1.0) * v / m, 1.0 / (m - 1.0))
                  : std::pow((m - 1.0) * v / (2.0 * m), 1.0 / (m - 1.0));
    case Family::PowPow:
      return left ? std::pow((m - 1.0) * v / m, 1.0 / (m - 1.0))
                  : std::pow((r - 1.0) * v / r, 1.0 / (r - 1.0));
    case Family::Custom:
      return custom_inverse(v);
  }
  return 0.0;
}

double EntropySpec::generalized_inverse_derivative(double v) const {
  if (v <= s_prime_0_) return 0.0;
  if (v > s_prime_1_minus_ && v < s_prime_1_plus_) return 0.0;
  const double rho = generalized_inverse(v);
  if (rho <= 0.0) return 0.0;
  double d2;
  if (v == s_prime_1_minus_) {
    d2 = family_ == Family::Custom ? custom_second(1.0) : second_derivative(1.0);
  } else if (v == s_prime_1_plus_) {
    d2 = family_ == Family::Custom ? interp_slope(right_knots_, right_sp_, 1.0)
                                   : second_derivative(std::nextafter(1.0, 2.0));
  } else {
    d2 = second_derivative(rho);
  }
  return d2 > 0.0 ? 1.0 / d2 : 0.0;
}

double EntropySpec::flux(double rho) const {
  require(rho >= 0.0, ErrorCode::kDomain, "flux at negative density");
  const double m = family_m_, r = family_r_;
  const bool left = rho <= 1.0;
  switch (family_) {
    case Family::LogLog:
      return left ? rho : 2.0 * rho;
    case Family::LogPow:
      return left ? rho : std::pow(rho, m) + 1.0 / (m - 1.0);
    case Family::PowPowEqual:
      return left ? std::pow(rho, m) + 1.0 / (m - 1.0)
                  : 2.0 * std::pow(rho, m) + 2.0 / (m - 1.0);
    case Family::PowPow:
      return left ? std::pow(rho, m) + 1.0 / (m - 1.0) : std::pow(rho, r) + 1.0 / (r - 1.0);
    case Family::Custom:
      if (rho == 0.0) return s_at_1_ - value(0.0);
      return rho * custom_derivative(rho, true) - value(rho) + s_at_1_;
  }
  return 0.0;
}

double EntropySpec::flux_derivative(double rho) const {
  if (rho <= 0.0) {
    if (family_ == Family::LogLog || family_ == Family::LogPow) return 1.0;
    return 0.0;
  }
  return rho * second_derivative(rho);
}

bool EntropySpec::pressure_consistent(double rho, double p, double tol) const {
  if (rho < 1.0) return std::abs(p - s_prime_1_minus_) <= tol;
  if (rho > 1.0) return std::abs(p - s_prime_1_plus_) <= tol;
  return p >= s_prime_1_minus_ - tol && p <= s_prime_1_plus_ + tol;
}

double EntropySpec::l_s(double rho, double p) const {
  require(rho >= 0.0, ErrorCode::kDomain, "L_S at negative density");
  const double tol = kConsistencyTol * std::max(1.0, std::abs(p));
  if (!pressure_consistent(rho, p, tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "pressure " << p << " is inconsistent with density " << rho;
    throw Error(ErrorCode::kConstraintViolation, msg.str());
  }
  if (rho == 1.0) return p;
  return flux(rho);
}

// ---------------------------------------------------------------------------
// Decomposition

double summability_beta(int dimension, double r) {
  if (dimension >= 3) return (2.0 * r - 1.0) * dimension / (dimension - 2.0);
  return kInf;
}

double default_l_exponent(double beta) { return std::min(2.0, 0.5 * (1.0 + beta)); }

EntropyDecomposition::EntropyDecomposition(const EntropySpec& spec, double l_exponent)
    : spec_(&spec), l_(l_exponent) {
  const bool log_form = spec.family() == Family::LogLog || spec.family() == Family::LogPow;
  form_ = log_form ? Form::Log : Form::Power;
  if (form_ == Form::Power) {
    const double beta = summability_beta(1, spec.r());
    require(std::isfinite(l_exponent) && l_exponent > 1.0 && l_exponent < beta,
            ErrorCode::kInvalidArgument, "splitting exponent must lie in (1, beta)");
  }
}

EntropyDecomposition decompose(const EntropySpec& spec, double l_exponent) {
  return EntropyDecomposition(spec, l_exponent);
}

double EntropyDecomposition::coefficient(double rho) const {
  return rho <= 1.0 ? spec_->s_prime_1_minus() : spec_->s_prime_1_plus();
}

double EntropyDecomposition::s_a(double rho) const {
  const double c = coefficient(rho);
  if (form_ == Form::Log) return c * xlogx(rho);
  return c * (std::pow(rho, l_) - 1.0) / l_;
}

double EntropyDecomposition::s_a_derivative(double rho) const {
  const double c = coefficient(rho);
  if (form_ == Form::Log) return c * (1.0 + std::log(rho));
  return c * std::pow(rho, l_ - 1.0);
}

double EntropyDecomposition::s_b(double rho) const { return spec_->value(rho) - s_a(rho); }

double EntropyDecomposition::s_b_derivative(double rho) const {
  if (rho == 1.0) return 0.0;
  return spec_->derivative(rho) - s_a_derivative(rho);
}

double EntropyDecomposition::s_b_second_derivative(double rho) const {
  const double c = coefficient(rho);
  const double sa2 = form_ == Form::Log ? c / rho : c * (l_ - 1.0) * std::pow(rho, l_ - 2.0);
  return spec_->second_derivative(rho) - sa2;
}

double EntropyDecomposition::l_s(double rho, double p) const {
  const double smooth = rho * s_b_derivative(rho) - s_b(rho) + s_b(1.0);
  if (form_ == Form::Log) return p * rho + smooth;
  return ((l_ - 1.0) * std::pow(rho, l_) + 1.0) * p / l_ + smooth;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const AssumptionCheck& c) { return c.status == CheckStatus::Fail; });
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

constexpr double kInconclusiveBand = 1e-12;

CheckStatus classify(double margin) {
  if (std::isnan(margin)) return CheckStatus::Fail;
  if (margin > kInconclusiveBand) return CheckStatus::Pass;
  if (margin >= -kInconclusiveBand) return CheckStatus::Inconclusive;
  return CheckStatus::Fail;
}

struct Worst {
  double margin = kInf;
  double at = 0.0;
  void update(double m, double rho) {
    if (std::isnan(m) || m < margin) {
      margin = std::isnan(m) ? -kInf : m;
      at = rho;
    }
  }
  AssumptionCheck as(const std::string& name) const {
    return {name, classify(margin), margin, at};
  }
};

std::vector<double> log_grid(double lo, double hi, std::size_t samples) {
  std::vector<double> g(samples);
  for (std::size_t j = 0; j < samples; ++j)
    g[j] = lo * std::pow(hi / lo, (static_cast<double>(j) + 0.5) / static_cast<double>(samples));
  return g;
}

void convexity_check(const EntropySpec& spec, const std::vector<double>& g, Worst& w) {
  for (std::size_t j = 1; j + 1 < g.size(); ++j) {
    const double a = g[j - 1], b = g[j], c = g[j + 1];
    const double s1 = (spec.value(b) - spec.value(a)) / (b - a);
    const double s2 = (spec.value(c) - spec.value(b)) / (c - b);
    w.update((s2 - s1) / (std::abs(s1) + std::abs(s2) + 1e-300), b);
  }
}

}  // namespace

ValidationReport validate_assumptions(const EntropySpec& spec, std::size_t samples) {
  require(samples >= 100, ErrorCode::kInvalidArgument, "validation needs at least 100 samples");
  ValidationReport rep;
  rep.positivity_expected = spec.positivity_expected();
  rep.m = spec.m();
  rep.r = spec.r();
  rep.sigma1 = spec.sigma1();
  rep.sigma2 = spec.sigma2();

  const auto below = log_grid(1e-6, 1.0, samples);
  const auto above = log_grid(1.0, 1e3, samples);

  rep.checks.push_back({"kink_order",
                        classify(spec.s_prime_1_plus() - spec.s_prime_1_minus()),
                        spec.s_prime_1_plus() - spec.s_prime_1_minus(), 1.0});

  Worst conv_lo, conv_hi;
  convexity_check(spec, below, conv_lo);
  convexity_check(spec, above, conv_hi);
  rep.checks.push_back(conv_lo.as("convexity_below_one"));
  rep.checks.push_back(conv_hi.as("convexity_above_one"));

  // Left and right pieces evaluated at 1 from their own sides.
  const double left_at_1 = spec.value(1.0);
  const double right_at_1 = spec.value(std::nextafter(1.0, 2.0));
  const double jump = std::abs(left_at_1 - right_at_1);
  rep.checks.push_back({"continuity_at_one",
                        jump <= 1e-12 ? CheckStatus::Pass : CheckStatus::Fail, 1e-12 - jump, 1.0});

  Worst super;
  for (std::size_t j = samples / 2; j + 1 < above.size(); ++j) {
    const double a = above[j], b = above[j + 1];
    const double qa = spec.value(a) / a, qb = spec.value(b) / b;
    super.update((qb - qa) / (std::abs(qa) + std::abs(qb) + 1e-300), a);
  }
  rep.checks.push_back(super.as("superlinearity"));

  Worst g_lo, g_up_lower, g_up_upper;
  for (double rho : below)
    g_lo.update(spec.sigma2() * spec.second_derivative(rho) * std::pow(rho, 2.0 - spec.m()) - 1.0,
                rho);
  for (double rho : above) {
    const double scaled = spec.second_derivative(rho) * std::pow(rho, 2.0 - spec.r());
    g_up_lower.update(spec.sigma1() * scaled - 1.0, rho);
    g_up_upper.update(1.0 - scaled / spec.sigma1(), rho);
  }
  rep.checks.push_back(g_lo.as("growth_below_one"));
  rep.checks.push_back(g_up_lower.as("growth_above_one_lower"));
  rep.checks.push_back(g_up_upper.as("growth_above_one_upper"));
  return rep;
}

}  // namespace jkoflow

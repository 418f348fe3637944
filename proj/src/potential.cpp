#include "jkoflow/potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "jkoflow/error.hpp"

namespace jkoflow {

namespace {

constexpr double kMaxSlope = 1e8;

std::size_t segment(const std::vector<double>& xs, double x) {
  if (x <= xs.front()) return 0;
  if (x >= xs.back()) return xs.size() - 2;
  return static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
}

}  // namespace

Potential Potential::zero() { return Potential(); }

Potential Potential::linear(double slope) {
  require(std::isfinite(slope), ErrorCode::kInvalidArgument, "potential slope must be finite");
  Potential p;
  p.kind_ = slope == 0.0 ? Kind::Zero : Kind::Linear;
  p.coeffs_ = {0.0, slope, 0.0};
  return p;
}

Potential Potential::quadratic(double c0, double c1, double c2) {
  require(std::isfinite(c0) && std::isfinite(c1) && std::isfinite(c2),
          ErrorCode::kInvalidArgument, "potential coefficients must be finite");
  Potential p;
  p.kind_ = Kind::Quadratic;
  p.coeffs_ = {c0, c1, c2};
  return p;
}

Potential Potential::table(std::vector<double> xs, std::vector<double> values) {
  require(xs.size() == values.size() && xs.size() >= 2, ErrorCode::kInvalidArgument,
          "potential table needs at least two (x, phi) rows");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(std::isfinite(xs[i]) && std::isfinite(values[i]), ErrorCode::kInvalidArgument,
            "potential table row " + std::to_string(i + 1) + " is not finite");
    if (i > 0) {
      require(xs[i] > xs[i - 1], ErrorCode::kInvalidArgument,
              "potential table x column must be strictly increasing");
      const double slope = (values[i] - values[i - 1]) / (xs[i] - xs[i - 1]);
      require(std::abs(slope) <= kMaxSlope, ErrorCode::kInvalidArgument,
              "potential table is not Lipschitz near x = " + std::to_string(xs[i]));
    }
  }
  Potential p;
  p.kind_ = Kind::Table;
  p.xs_ = std::move(xs);
  p.vals_ = std::move(values);
  return p;
}

Potential Potential::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open potential table '" + path + "'");
  std::vector<double> xs, vals;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line.erase(std::remove_if(line.begin(), line.end(),
                              [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!header) {
      if (line != "x,phi") throw Error(ErrorCode::kIo, where + ": expected header 'x,phi'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kIo, where + ": expected 'x,phi'");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vals.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kIo, where + ": not a number");
    }
  }
  return table(std::move(xs), std::move(vals));
}

double Potential::value(double x) const {
  if (kind_ == Kind::Table) {
    const std::size_t k = segment(xs_, x);
    const double slope = (vals_[k + 1] - vals_[k]) / (xs_[k + 1] - xs_[k]);
    return vals_[k] + slope * (x - xs_[k]);
  }
  return coeffs_[0] + x * (coeffs_[1] + x * coeffs_[2]);
}

double Potential::derivative(double x) const {
  if (kind_ == Kind::Table) {
    const std::size_t k = segment(xs_, x);
    return (vals_[k + 1] - vals_[k]) / (xs_[k + 1] - xs_[k]);
  }
  return coeffs_[1] + 2.0 * coeffs_[2] * x;
}

bool Potential::is_constant() const {
  if (kind_ == Kind::Table)
    return std::all_of(vals_.begin(), vals_.end(), [&](double v) { return v == vals_[0]; });
  return coeffs_[1] == 0.0 && coeffs_[2] == 0.0;
}

double Potential::lipschitz(double l) const {
  if (kind_ == Kind::Table) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < xs_.size(); ++k) {
      if (xs_[k + 1] < 0.0 || xs_[k] > l) continue;
      worst = std::max(worst, std::abs(derivative(0.5 * (xs_[k] + xs_[k + 1]))));
    }
    return std::max({worst, std::abs(derivative(0.0)), std::abs(derivative(l))});
  }
  return std::max(std::abs(derivative(0.0)), std::abs(derivative(l)));
}

bool Potential::boundary_condition_holds(double l) const {
  return derivative(0.0) < 0.0 && derivative(l) > 0.0;
}

std::vector<double> Potential::sample_centers(double l, std::size_t n) const {
  std::vector<double> out(n);
  const double h = l / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = value((static_cast<double>(i) + 0.5) * h);
  return out;
}

}  // namespace jkoflow

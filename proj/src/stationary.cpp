#include "jkoflow/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "jkoflow/error.hpp"

namespace jkoflow {

namespace {

// Bisection for an increasing function with f(lo) < 0 < f(hi).
template <class F>
double bisect(F&& f, double lo, double hi) {
  double f_lo = f(lo), f_hi = f(hi);
  require(f_lo <= 0.0 && f_hi >= 0.0, ErrorCode::kNoSolution, "stationary root is not bracketed");
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::string to_string(StationaryProfile::Regime regime) {
  switch (regime) {
    case StationaryProfile::Regime::ThreePhase: return "ThreePhase";
    case StationaryProfile::Regime::TwoPhase: return "TwoPhase";
    case StationaryProfile::Regime::Pure: return "Pure";
  }
  return "?";
}

double three_phase_threshold() { return std::log(1.5) + 0.5; }
double two_phase_threshold() { return std::log(2.0); }

StationaryProfile stationary_log_linear(double l) {
  require(l > 0.0 && std::isfinite(l), ErrorCode::kInvalidArgument,
          "domain length must be positive");
  StationaryProfile p;
  p.l_ = l;
  if (l > three_phase_threshold()) {
    p.regime_ = StationaryProfile::Regime::ThreePhase;
    p.a_ = bisect(
        [l](double a) { return std::exp(a) - 0.5 * std::exp(2.0 * a + 1.0 - 2.0 * l) - 1.0; },
        0.0, l - 0.5);
  } else if (l > two_phase_threshold()) {
    p.regime_ = StationaryProfile::Regime::TwoPhase;
    p.a_ = bisect([l](double a) { return std::exp(a) - a - (2.0 - l); }, l - 0.5, l);
  } else {
    // rho = e^(-x) / (1 - e^(-l)) stays above 1, so the region {rho < 1} is empty.
    p.regime_ = StationaryProfile::Regime::Pure;
    p.a_ = -std::log1p(-std::exp(-l));
  }
  return p;
}

std::optional<std::pair<double, double>> StationaryProfile::plateau() const {
  switch (regime_) {
    case Regime::ThreePhase: return std::make_pair(a_, a_ + 0.5);
    case Regime::TwoPhase: return std::make_pair(a_, l_);
    case Regime::Pure: return std::nullopt;
  }
  return std::nullopt;
}

double StationaryProfile::density(double x) const {
  if (regime_ == Regime::Pure || x < a_) return std::exp(a_ - x);
  if (regime_ == Regime::TwoPhase || x <= a_ + 0.5) return 1.0;
  return std::exp(2.0 * a_ + 1.0 - 2.0 * x);
}

double StationaryProfile::pressure(double x) const {
  return std::clamp(pressure_constant() - 2.0 * x, 1.0, 2.0);
}

double StationaryProfile::antiderivative(double x) const {
  if (regime_ == Regime::Pure || x <= a_) return std::exp(a_) * -std::expm1(-x);
  const double head = std::expm1(a_);
  if (regime_ == Regime::TwoPhase || x <= a_ + 0.5) return head + (x - a_);
  return head + 0.5 - 0.5 * std::expm1(2.0 * a_ + 1.0 - 2.0 * x);
}

double StationaryProfile::integral(double x0, double x1) const {
  return antiderivative(x1) - antiderivative(x0);
}

GridDensity StationaryProfile::cell_averages(std::size_t n) const {
  require(n >= 1, ErrorCode::kInvalidArgument, "grid needs at least one cell");
  const double h = l_ / static_cast<double>(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = integral(static_cast<double>(i) * h, static_cast<double>(i + 1) * h) / h;
  return GridDensity::normalized(l_, std::move(v));
}

double stationary_residual(const EntropySpec& spec, const Potential& phi, const GridDensity& rho,
                           const std::vector<double>& p) {
  require(p.size() == rho.n(), ErrorCode::kInvalidArgument, "pressure and density sizes differ");
  const std::size_t n = rho.n();
  const double h = rho.h();
  const auto samples = phi.sample_centers(rho.l(), n);
  std::vector<double> ls(n);
  for (std::size_t i = 0; i < n; ++i) ls[i] = spec.l_s(rho[i], p[i]);
  double worst = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double drift = (samples[i] - samples[i - 1]) / h;
    const double total = (ls[i] - ls[i - 1]) / h + drift * 0.5 * (rho[i - 1] + rho[i]);
    worst = std::max(worst, std::abs(total));
  }
  return worst;
}

}  // namespace jkoflow

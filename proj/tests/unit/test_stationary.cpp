#include <cmath>
#include <vector>

#include "doctest.h"
#include "jkoflow/error.hpp"
#include "jkoflow/stationary.hpp"

using namespace jkoflow;
using doctest::Approx;
using Regime = StationaryProfile::Regime;

namespace {

// With y = e^A the three-phase mass balance is the quadratic
// (k / 2) y^2 - y + 1 = 0, k = e^(1 - 2l); A is the root in (0, l - 1/2).
double three_phase_a(double l) {
  const double k = std::exp(1.0 - 2.0 * l);
  return std::log((1.0 - std::sqrt(1.0 - 2.0 * k)) / k);
}

// e^A - A = 2 - l on [l - 1/2, l), by Newton from the right end.
double two_phase_a(double l) {
  double a = l;
  for (int i = 0; i < 100; ++i) a -= (std::exp(a) - a - (2.0 - l)) / (std::exp(a) - 1.0);
  return a;
}

// Centre pressure on the plateau, the pinned endpoint elsewhere.
std::vector<double> pressures(const StationaryProfile& p, const GridDensity& rho) {
  std::vector<double> out(rho.n());
  for (std::size_t i = 0; i < rho.n(); ++i) {
    if (rho[i] < 1.0) out[i] = 1.0;
    else if (rho[i] > 1.0) out[i] = 2.0;
    else out[i] = p.pressure(rho.center(i));
  }
  return out;
}

}  // namespace

TEST_CASE("thresholds") {
  CHECK(three_phase_threshold() == Approx(std::log(1.5) + 0.5).epsilon(1e-15));
  CHECK(two_phase_threshold() == Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("regimes and breakpoints") {
  SUBCASE("l = 1 has three phases") {
    const auto p = stationary_log_linear(1.0);
    CHECK(p.regime() == Regime::ThreePhase);
    CHECK(p.breakpoint() == Approx(three_phase_a(1.0)).epsilon(1e-12));
    CHECK(p.breakpoint() == Approx(0.2783630385817797).epsilon(1e-12));
    REQUIRE(p.plateau().has_value());
    CHECK(p.plateau()->second - p.plateau()->first == Approx(0.5));
  }
  SUBCASE("l = 0.8 has two phases") {
    const auto p = stationary_log_linear(0.8);
    CHECK(p.regime() == Regime::TwoPhase);
    CHECK(p.breakpoint() == Approx(two_phase_a(0.8)).epsilon(1e-12));
    CHECK(p.breakpoint() >= 0.3);
    CHECK(p.plateau()->second == 0.8);
  }
  SUBCASE("l = 0.6 is pure") {
    const auto p = stationary_log_linear(0.6);
    CHECK(p.regime() == Regime::Pure);
    CHECK_FALSE(p.plateau().has_value());
    for (double x : {0.0, 0.2, 0.6}) CHECK(p.density(x) == Approx(std::exp(-x) / (1.0 - std::exp(-0.6))));
  }
  SUBCASE("boundary cases") {
    CHECK(stationary_log_linear(std::log(2.0)).regime() == Regime::Pure);
    CHECK(stationary_log_linear(std::log(2.0) + 1e-6).regime() == Regime::TwoPhase);
    CHECK(stationary_log_linear(three_phase_threshold()).regime() == Regime::TwoPhase);
    CHECK(stationary_log_linear(three_phase_threshold() + 1e-6).regime() == Regime::ThreePhase);
    CHECK_THROWS_AS(stationary_log_linear(0.0), Error);
  }
  SUBCASE("three-phase formula holds across lengths") {
    for (double l : {0.95, 1.3, 2.0, 4.0}) CHECK(stationary_log_linear(l).breakpoint() == Approx(three_phase_a(l)).epsilon(1e-11));
  }
}

TEST_CASE("profile mass, continuity and pressure") {
  for (double l : {0.3, 0.6, std::log(2.0) + 0.01, 0.8, 1.0, 1.5, 3.0}) {
    CAPTURE(l);
    const auto p = stationary_log_linear(l);
    CHECK(std::abs(p.integral(0.0, l) - 1.0) <= 1e-10);
    CHECK(std::abs(p.cell_averages(257).mass() - 1.0) <= 1e-10);
    // Continuous across the breakpoints.
    const double a = p.breakpoint();
    for (double x : {a, a + 0.5}) {
      if (x > 0.0 && x < l) CHECK(p.density(x - 1e-12) == Approx(p.density(x + 1e-12)).epsilon(1e-9));
    }
    for (int k = 0; k <= 100; ++k) {
      const double x = l * k / 100.0;
      CHECK(p.pressure(x) >= 1.0);
      CHECK(p.pressure(x) <= 2.0);
      if (p.density(x) < 1.0 - 1e-12) CHECK(p.pressure(x) == 1.0);
      if (p.density(x) > 1.0 + 1e-12) CHECK(p.pressure(x) == 2.0);
    }
    // Midpoint sums of the pointwise density agree with the exact integral.
    double sum = 0.0;
    const int m = 20000;
    for (int k = 0; k < m; ++k) sum += p.density(l * (k + 0.5) / m) * l / m;
    CHECK(sum == Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("stationary residual") {
  const auto ll = EntropySpec::log_log();
  SUBCASE("analytic profile is stationary") {
    const auto p = stationary_log_linear(1.0);
    // Pointwise samples at the centres. The midpoint mass is off by O(h^2);
    // rescaling the off-plateau cells restores it and keeps rho = 1 exact.
    const std::size_t n = 1024;
    std::vector<double> v(n);
    double plateau = 0.0, rest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = p.density((i + 0.5) / n);
      (v[i] == 1.0 ? plateau : rest) += v[i] / n;
    }
    for (auto& x : v)
      if (x != 1.0) x *= (1.0 - plateau) / rest;
    const GridDensity rho(1.0, v);
    CHECK(stationary_residual(ll, Potential::linear(2.0), rho, pressures(p, rho)) <= 1e-3);
  }
  SUBCASE("uniform without potential") {
    const auto u = GridDensity::uniform(1.0, 64);
    CHECK(stationary_residual(ll, Potential::zero(), u, std::vector<double>(64, 1.5)) == 0.0);
  }
  SUBCASE("uniform with a linear potential") {
    const auto u = GridDensity::uniform(1.0, 64);
    CHECK(stationary_residual(ll, Potential::linear(2.0), u, std::vector<double>(64, 1.5)) ==
          Approx(2.0).epsilon(1e-12));
  }
}

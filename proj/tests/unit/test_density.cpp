#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "atoms.hpp"
#include "doctest.h"
#include "jkoflow/density.hpp"
#include "jkoflow/error.hpp"

using namespace jkoflow;
using doctest::Approx;

namespace {

GridDensity half_block(std::size_t n) {
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n / 2; ++i) v[i] = 2.0;
  return GridDensity(1.0, v);
}

GridDensity random_density(std::mt19937_64& gen, double l, std::size_t n, bool allow_zero) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = allow_zero && u(gen) < 0.2 ? 0.0 : 0.05 + u(gen);
  v[n / 2] += 0.1;
  return GridDensity::normalized(l, v);
}

}  // namespace

TEST_CASE("grid density invariants") {
  CHECK_THROWS_AS(GridDensity(1.0, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(GridDensity(1.0, {2.5, -0.5}), Error);
  const auto u = GridDensity::uniform(2.0, 8);
  CHECK(u.mass() == Approx(1.0).epsilon(1e-15));
  CHECK(u[3] == 0.5);
  CHECK(u.h() == 0.25);
  CHECK(u.cdf().back() == 1.0);
  double factor = 0.0;
  const auto d = GridDensity::normalized(1.0, {1.0, 3.0}, &factor);
  CHECK(factor == Approx(0.5));
  CHECK(d[1] == Approx(1.5));
}

TEST_CASE("quantile") {
  const auto u = GridDensity::uniform(1.0, 10);
  CHECK(quantile(u, 0.25) == Approx(0.25).epsilon(1e-14));
  CHECK(quantile(u, 0.0) == 0.0);
  CHECK(quantile(u, 1.0) == Approx(1.0).epsilon(1e-14));
  const auto b = half_block(10);
  CHECK(quantile(b, 0.5) == Approx(0.25).epsilon(1e-14));
  // s = 1 lands on the right end of the support, not of the domain.
  CHECK(quantile(b, 1.0) == Approx(0.5).epsilon(1e-14));
  // Left-continuous at a flat CDF stretch.
  const GridDensity gap(1.0, {2.0, 0.0, 0.0, 2.0});
  CHECK(quantile(gap, 0.5) == Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(quantile(u, 1.5), Error);
  CHECK_THROWS_AS(quantile(u, -0.1), Error);
}

TEST_CASE("quantile inverts the CDF inside the support") {
  std::mt19937_64 gen(3);
  const auto rho = random_density(gen, 1.0, 64, false);
  for (std::size_t i = 0; i <= 64; ++i) {
    CHECK(std::abs(quantile(rho, rho.cdf()[i]) - rho.face(i)) <= rho.h());
  }
}

TEST_CASE("wasserstein distance examples") {
  const auto u = GridDensity::uniform(1.0, 16);
  CHECK(wasserstein2(u, u) == 0.0);
  std::vector<double> left(32, 0.0), right(32, 0.0);
  for (int i = 0; i < 16; ++i) left[i] = 1.0;
  for (int i = 16; i < 32; ++i) right[i] = 1.0;
  CHECK(wasserstein2(GridDensity(2.0, left), GridDensity(2.0, right)) == Approx(1.0).epsilon(1e-14));
  CHECK(wasserstein2(u, half_block(16)) == Approx(1.0 / std::sqrt(12.0)).epsilon(1e-14));
  CHECK_THROWS_AS(wasserstein2(u, GridDensity::uniform(2.0, 16)), Error);
}

TEST_CASE("wasserstein distance is a metric") {
  std::mt19937_64 gen(4);
  for (int k = 0; k < 200; ++k) {
    const auto a = random_density(gen, 1.0, 8 + k % 9, true);
    const auto b = random_density(gen, 1.0, 8 + (k * 7) % 13, true);
    const auto c = random_density(gen, 1.0, 16, true);
    CHECK(wasserstein2(a, b) == wasserstein2(b, a));
    CHECK(wasserstein2(a, c) <= wasserstein2(a, b) + wasserstein2(b, c) + 1e-12);
  }
}

TEST_CASE("quantile formula matches the assignment LP on atomized measures") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::size_t> cells(1, 16);
  for (int k = 0; k < 100; ++k) {
    const int atoms = 48;
    const double l = 0.5 + 0.25 * (k % 7);
    const auto ca = testsupport::random_counts(gen, cells(gen), atoms);
    const auto cb = testsupport::random_counts(gen, cells(gen), atoms);
    const auto a = testsupport::density_from_counts(ca, l);
    const auto b = testsupport::density_from_counts(cb, l);
    const double lp = testsupport::assignment_w2_squared(ca, cb, l);
    CHECK(std::abs(wasserstein2_squared(a, b) - lp) <= 1e-9);
  }
}

TEST_CASE("kantorovich data") {
  SUBCASE("fixed point") {
    const auto u = GridDensity::uniform(1.0, 32);
    const auto t = kantorovich(u, u);
    CHECK(t.w2 == 0.0);
    for (std::size_t i = 0; i < 32; ++i) {
      CHECK(t.map_values[i] == Approx(u.center(i)).epsilon(1e-14));
      CHECK(std::abs(t.potential_values[i]) < 1e-14);
    }
  }
  SUBCASE("translation has constant potential slope") {
    const double a = 0.375;
    const std::size_t n = 64;
    const double h = 2.0 / n;
    std::vector<double> r(n, 0.0), s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (i + 0.5) * h;
      if (x < 1.0) r[i] = 1.0;
      if (x > a && x < 1.0 + a) s[i] = 1.0;
    }
    const auto t = kantorovich(GridDensity(2.0, r), GridDensity(2.0, s));
    for (std::size_t i = 0; i + 1 < n / 2; ++i) {
      const double slope = (t.potential_values[i + 1] - t.potential_values[i]) / h;
      CHECK(slope == Approx(-a).epsilon(1e-12));
    }
    CHECK(t.w2 == Approx(a).epsilon(1e-12));
  }
  SUBCASE("map is monotone and w2 agrees with the cell sum") {
    std::mt19937_64 gen(6);
    for (int k = 0; k < 20; ++k) {
      const auto a = random_density(gen, 1.0, 128, false);
      const auto b = random_density(gen, 1.0, 128, true);
      const auto t = kantorovich(a, b);
      for (std::size_t i = 1; i < 128; ++i) CHECK(t.map_values[i] >= t.map_values[i - 1]);
      double sum = 0.0;
      for (std::size_t i = 0; i < 128; ++i) sum += a[i] * std::pow(a.center(i) - t.map_values[i], 2);
      // The centre-sampled sum is a midpoint rule for the exact integral.
      CHECK(std::abs(a.h() * sum - t.w2 * t.w2) <= 1e-3);
      CHECK(t.potential_values[0] == 0.0);
    }
  }
}

TEST_CASE("lp distances") {
  const auto u = GridDensity::uniform(1.0, 16);
  const auto b = half_block(16);
  CHECK(lp_distance(u, u, 1.0) == 0.0);
  CHECK(lp_distance(u, b, 1.0) == Approx(1.0).epsilon(1e-14));
  CHECK(lp_distance(u, b, INFINITY) == Approx(1.0).epsilon(1e-14));
  CHECK(lp_distance(u, b, 2.0) == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(lp_distance(u, GridDensity::uniform(1.0, 8), 1.0), Error);
  CHECK_THROWS_AS(lp_distance(u, b, 0.5), Error);
}

TEST_CASE("density csv loader renormalizes") {
  const std::string path = "density_loader_test.csv";
  {
    std::ofstream out(path);
    out << "x,rho\n0.125,2\n0.375,2\n0.625,2\n0.875,2\n";
  }
  const auto loaded = load_density_csv(path);
  CHECK(loaded.density.n() == 4);
  CHECK(loaded.density.l() == Approx(1.0));
  CHECK(loaded.normalization_factor == Approx(0.5));
  CHECK(loaded.density[0] == Approx(1.0));
  {
    std::ofstream out(path);
    out << "x,rho\n0.125,2\n0.4,2\n";
  }
  CHECK_THROWS_AS(load_density_csv(path), Error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_density_csv("no_such_file.csv"), Error);
}

TEST_CASE("upper tail quantiles keep relative precision") {
  // Right tail carries ~1e-12 mass per cell: F rounds to 1 there but the
  // survival function still resolves each cell.
  std::vector<double> v(100, 1e-9);
  for (std::size_t i = 0; i < 50; ++i) v[i] = 2.0;
  const auto rho = GridDensity::normalized(1.0, v);
  const auto& S = rho.survival();
  CHECK(S.front() == 1.0);
  CHECK(S.back() == 0.0);
  CHECK(S[99] == Approx(rho[99] * rho.h()).epsilon(1e-12));
  for (std::size_t i = 60; i < 100; ++i) {
    CAPTURE(i);
    CHECK(upper_quantile(rho, 0.5 * (S[i] + S[i + 1])) == Approx(rho.center(i)).epsilon(1e-12));
  }
  CHECK(upper_quantile(rho, 0.75) == Approx(quantile(rho, 0.25)));
  CHECK(upper_quantile(rho, 0.0) == Approx(1.0));
  // Displacement of a density against itself vanishes in the tail as well.
  for (double d : displacement(rho, rho)) CHECK(std::abs(d) <= 1e-12);
}

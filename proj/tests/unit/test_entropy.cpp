#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "jkoflow/entropy.hpp"
#include "jkoflow/error.hpp"

using namespace jkoflow;
using doctest::Approx;

namespace {

std::vector<EntropySpec> all_families() {
  return {EntropySpec::log_log(), EntropySpec::log_pow(2.0), EntropySpec::pow_pow_equal(2.0),
          EntropySpec::pow_pow(3.0, 2.0)};
}

// Random density with a pressure satisfying the constraints; a quarter of the
// draws land exactly on rho = 1.
std::pair<double, double> consistent_pair(const EntropySpec& s, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pick = u(gen);
  if (pick < 0.25) {
    const double p = s.s_prime_1_minus() + u(gen) * (s.s_prime_1_plus() - s.s_prime_1_minus());
    return {1.0, p};
  }
  const double rho = pick < 0.6 ? 1e-3 + 0.998 * u(gen) : 1.0 + 1e-3 + 4.0 * u(gen);
  return {rho, rho < 1.0 ? s.s_prime_1_minus() : s.s_prime_1_plus()};
}

const char* kPpeTable =
    "# rho^2 below 1, 2 rho^2 - 1 above\n"
    "s_prime_1_minus=2\n"
    "s_prime_1_plus=4\n"
    "s_at_1=1\n"
    "rho,s_prime\n"
    "0.5,1\n"
    "2,8\n";

}  // namespace

TEST_CASE("entropy values of the built-in families") {
  const auto ll = EntropySpec::log_log();
  CHECK(ll.value(1.0) == 0.0);
  CHECK(ll.value(2.0) == Approx(4.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(ll.value(0.0) == 0.0);
  CHECK(EntropySpec::pow_pow_equal(2.0).value(0.5) == Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(ll.value(-1e-3), Error);
  try {
    ll.value(-1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
}

TEST_CASE("subdifferential is the kink interval at rho = 1") {
  const auto ll = EntropySpec::log_log();
  const auto at1 = ll.subdifferential(1.0);
  CHECK(at1.lo == 1.0);
  CHECK(at1.hi == 2.0);
  const auto half = ll.subdifferential(0.5);
  CHECK(half.is_singleton());
  CHECK(half.lo == Approx(1.0 + std::log(0.5)).epsilon(1e-14));
  const auto ppe = EntropySpec::pow_pow_equal(2.0).subdifferential(1.0);
  CHECK(ppe.lo == Approx(2.0));
  CHECK(ppe.hi == Approx(4.0));
  CHECK(std::isinf(ll.s_prime_0()));
  CHECK(ll.positivity_expected());
  CHECK_FALSE(EntropySpec::pow_pow_equal(2.0).positivity_expected());
}

TEST_CASE("generalized inverse of the log-log entropy") {
  const auto ll = EntropySpec::log_log();
  CHECK(ll.generalized_inverse(1.5) == 1.0);
  CHECK(ll.generalized_inverse(1.0) == 1.0);
  CHECK(ll.generalized_inverse(2.0) == 1.0);
  CHECK(ll.generalized_inverse(0.5) == Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(ll.generalized_inverse(3.0) == Approx(std::exp(0.5)).epsilon(1e-14));
  // Below S'(0+) the inverse is 0 for families with finite S'(0+).
  CHECK(EntropySpec::pow_pow_equal(2.0).generalized_inverse(-1.0) == 0.0);
}

TEST_CASE("generalized inverse is nondecreasing and inverts S' off the plateau") {
  for (const auto& s : all_families()) {
    CAPTURE(to_string(s.family()));
    double prev = -1.0;
    for (int k = 0; k <= 4000; ++k) {
      const double v = -6.0 + 16.0 * k / 4000.0;
      const double r = s.generalized_inverse(v);
      CHECK(r >= prev);
      prev = r;
    }
    for (double rho : {1e-3, 0.1, 0.5, 0.9, 0.999, 1.001, 1.5, 3.0, 10.0}) {
      CHECK(s.generalized_inverse(s.derivative(rho)) == Approx(rho).epsilon(1e-10));
    }
  }
}

TEST_CASE("L_S operator") {
  const auto ll = EntropySpec::log_log();
  CHECK(ll.l_s(0.5, 1.0) == Approx(0.5).epsilon(1e-14));
  CHECK(ll.l_s(1.0, 1.3) == 1.3);
  CHECK(ll.l_s(2.0, 2.0) == Approx(4.0).epsilon(1e-14));
  CHECK(EntropySpec::pow_pow_equal(2.0).l_s(0.5, 2.0) == Approx(1.25).epsilon(1e-14));
  try {
    ll.l_s(0.5, 1.5);
    FAIL("inconsistent pressure accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConstraintViolation);
  }
  CHECK_THROWS_AS(ll.l_s(1.0, 2.5), Error);
}

TEST_CASE("L_S is strictly monotone on consistent pairs") {
  std::mt19937_64 gen(11);
  for (const auto& s : all_families()) {
    CAPTURE(to_string(s.family()));
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      auto [r1, p1] = consistent_pair(s, gen);
      auto [r2, p2] = consistent_pair(s, gen);
      if (r1 == r2) continue;
      if (r1 > r2) {
        std::swap(r1, r2);
        std::swap(p1, p2);
      }
      if (!(s.l_s(r1, p1) < s.l_s(r2, p2))) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("A-ratio stays within the growth constants for m = 1 families") {
  std::mt19937_64 gen(12);
  for (const auto& s : {EntropySpec::log_log(), EntropySpec::log_pow(2.0)}) {
    REQUIRE(s.m() == 1.0);
    const double bound = std::max(s.sigma1(), s.sigma2());
    for (int k = 0; k < 10000; ++k) {
      const auto [r1, p1] = consistent_pair(s, gen);
      const auto [r2, p2] = consistent_pair(s, gen);
      if (r1 == r2) continue;
      const double a = (r1 - r2) / (s.l_s(r1, p1) - s.l_s(r2, p2));
      CHECK(a >= 0.0);
      CHECK(a <= bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("decomposition splits S into kink and smooth parts") {
  SUBCASE("log-log has no smooth part") {
    const auto ll = EntropySpec::log_log();
    const auto d = decompose(ll, 2.0);
    CHECK(d.form() == EntropyDecomposition::Form::Log);
    for (double rho : {0.2, 0.7, 1.0, 1.6, 4.0}) CHECK(std::abs(d.s_b_derivative(rho)) < 1e-12);
  }
  SUBCASE("log-pow smooth part is flat at 1") {
    const auto d = decompose(EntropySpec::log_pow(2.0), 2.0);
    CHECK(std::abs(d.s_b_derivative(1.0)) < 1e-12);
  }
  SUBCASE("pow-pow sum identity") {
    const auto s = EntropySpec::pow_pow(3.0, 2.0);
    const auto d = decompose(s, 1.5);
    CHECK(d.form() == EntropyDecomposition::Form::Power);
    for (double rho : {0.3, 1.0, 2.7}) CHECK(std::abs(d.s_a(rho) + d.s_b(rho) - s.value(rho)) <= 1e-10);
    CHECK(std::abs(d.s_b_derivative(1.0)) < 1e-12);
    CHECK(d.s_b(1.0) == Approx(s.s_at_1()).epsilon(1e-14));
  }
  SUBCASE("exponent must exceed 1") {
    CHECK_THROWS_AS(decompose(EntropySpec::pow_pow(3.0, 2.0), 1.0), Error);
    CHECK_THROWS_AS(decompose(EntropySpec::pow_pow_equal(2.0), 0.5), Error);
  }
  SUBCASE("default exponent on the line") {
    CHECK(std::isinf(summability_beta(1, 2.0)));
    CHECK(default_l_exponent(summability_beta(1, 2.0)) == 2.0);
  }
}

TEST_CASE("L_S through the splitting matches the direct formula") {
  std::mt19937_64 gen(13);
  for (const auto& s : all_families()) {
    CAPTURE(to_string(s.family()));
    const auto d = decompose(s, default_l_exponent(summability_beta(1, s.r())));
    for (int k = 0; k < 2000; ++k) {
      const auto [rho, p] = consistent_pair(s, gen);
      CHECK(d.l_s(rho, p) == Approx(s.l_s(rho, p)).epsilon(1e-9));
    }
  }
}

TEST_CASE("assumption validation") {
  SUBCASE("log-log") {
    const auto rep = validate_assumptions(EntropySpec::log_log(), 200);
    CHECK(rep.passed());
    CHECK(rep.m == 1.0);
    CHECK(rep.sigma2 == 1.0);
    CHECK(rep.positivity_expected);
  }
  SUBCASE("log-pow grows with r = m") {
    for (double m : {1.5, 2.0, 3.0}) {
      const auto s = EntropySpec::log_pow(m);
      CHECK(s.r() == m);
      CHECK(validate_assumptions(s, 200).passed());
    }
  }
  SUBCASE("power families") {
    CHECK(validate_assumptions(EntropySpec::pow_pow_equal(2.0), 200).passed());
    CHECK(validate_assumptions(EntropySpec::pow_pow(3.0, 2.0), 200).passed());
  }
  SUBCASE("custom table with a concave dip is located") {
    const auto t = parse_custom_table(
        "s_prime_1_minus=1\ns_prime_1_plus=2\ns_at_1=0\nrho,s_prime\n0.2,0.3\n0.4,0.6\n0.5,0.5\n"
        "0.8,0.9\n2,3\n",
        "dip");
    const auto rep = validate_assumptions(EntropySpec::custom(t), 400);
    CHECK_FALSE(rep.passed());
    const auto* c = rep.find("convexity_below_one");
    REQUIRE(c != nullptr);
    CHECK(c->status == CheckStatus::Fail);
    CHECK(c->at_rho >= 0.4);
    CHECK(c->at_rho <= 0.5);
  }
  SUBCASE("samples below 100 are rejected") {
    CHECK_THROWS_AS(validate_assumptions(EntropySpec::log_log(), 50), Error);
  }
}

TEST_CASE("custom table reproduces an equal-power entropy") {
  const auto s = EntropySpec::custom(parse_custom_table(kPpeTable, "ppe"));
  const auto ref = EntropySpec::pow_pow_equal(2.0);
  for (double rho : {0.0, 0.1, 0.5, 0.9, 1.0, 1.3, 2.0, 3.5}) {
    CAPTURE(rho);
    CHECK(s.value(rho) == Approx(ref.value(rho)).epsilon(1e-12));
    if (rho > 0.0 && rho != 1.0) CHECK(s.derivative(rho) == Approx(ref.derivative(rho)).epsilon(1e-12));
  }
  CHECK(s.subdifferential(1.0).lo == 2.0);
  CHECK(s.subdifferential(1.0).hi == 4.0);
  CHECK(s.l_s(0.5, 2.0) == Approx(1.25).epsilon(1e-12));
}

TEST_CASE("custom table parsing errors") {
  CHECK_THROWS_AS(parse_custom_table("s_prime_1_minus=1\nrho,s_prime\n0.5,0\n", "x"), Error);
  CHECK_THROWS_AS(parse_custom_table("s_prime_1_minus=1\ns_prime_1_plus=2\ns_at_1=0\nrho,sp\n", "x"),
                  Error);
  auto t = parse_custom_table("s_prime_1_minus=1\ns_prime_1_plus=2\ns_at_1=0\nrho,s_prime\n0.5,0\n0.4,0.1\n", "x");
  CHECK_THROWS_AS(EntropySpec::custom(t), Error);
}

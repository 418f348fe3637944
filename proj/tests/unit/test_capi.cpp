#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "jkoflow/jkoflow.h"

using doctest::Approx;

TEST_CASE("status names and last error") {
  CHECK(std::string(jkf_status_name(JKF_OK)) == "ok");
  CHECK(std::string(jkf_status_name(JKF_ERR_CONFIG)) == "config error");
  CHECK(std::string(jkf_status_name(12345)) == "internal error");
  jkf_config* cfg = nullptr;
  CHECK(jkf_config_load(nullptr, &cfg) == JKF_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(jkf_last_error()) > 0);
}

TEST_CASE("config handles") {
  jkf_config* cfg = nullptr;
  REQUIRE(jkf_config_parse("{\"n\": 32, \"tau\": 0.05, \"horizon\": 0.1}", nullptr, &cfg) == JKF_OK);
  CHECK(std::string(jkf_last_error()).empty());
  char* fp = nullptr;
  REQUIRE(jkf_config_fingerprint(cfg, &fp) == JKF_OK);
  CHECK(std::strlen(fp) == 16);
  CHECK(jkf_config_set_seed(cfg, 5) == JKF_OK);
  char* fp2 = nullptr;
  REQUIRE(jkf_config_fingerprint(cfg, &fp2) == JKF_OK);
  CHECK(std::string(fp) != std::string(fp2));
  CHECK(jkf_config_set_frames_every(cfg, 0) == JKF_ERR_INVALID_ARGUMENT);
  jkf_string_free(fp);
  jkf_string_free(fp2);

  char* summary = nullptr;
  REQUIRE(jkf_run(cfg, "capi_run", &summary) == JKF_OK);
  CHECK(std::string(summary).find("\"diagnostics_failed\": 0") != std::string::npos);
  jkf_string_free(summary);
  jkf_config_free(cfg);

  jkf_config* bad = nullptr;
  CHECK(jkf_config_parse("{\n\"tau\": 0.03,\n\"horizon\": 0.1\n}", nullptr, &bad) == JKF_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(jkf_last_error()).find("horizon") != std::string::npos);
  CHECK(jkf_config_load("no/such/config.json", &bad) != JKF_OK);
  jkf_config_free(nullptr);
}

TEST_CASE("entropy handles") {
  jkf_entropy* s = nullptr;
  REQUIRE(jkf_entropy_create(JKF_LOG_LOG, 0, 0, &s) == JKF_OK);
  double v = 0, lo = 0, hi = 0;
  CHECK(jkf_entropy_value(s, 2.0, &v) == JKF_OK);
  CHECK(v == Approx(4.0 * std::log(2.0)));
  CHECK(jkf_entropy_subdifferential(s, 1.0, &lo, &hi) == JKF_OK);
  CHECK(lo == 1.0);
  CHECK(hi == 2.0);
  CHECK(jkf_entropy_inverse(s, 1.5, &v) == JKF_OK);
  CHECK(v == 1.0);
  CHECK(jkf_entropy_l_s(s, 0.5, 1.0, &v) == JKF_OK);
  CHECK(v == Approx(0.5));
  CHECK(jkf_entropy_value(s, -1.0, &v) == JKF_ERR_DOMAIN);
  CHECK(jkf_entropy_l_s(s, 0.5, 1.5, &v) == JKF_ERR_CONSTRAINT);
  jkf_entropy_free(s);
  CHECK(jkf_entropy_create(JKF_POW_POW, 0.5, 2.0, &s) != JKF_OK);
  CHECK(jkf_entropy_create(static_cast<jkf_family>(42), 2.0, 2.0, &s) == JKF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("density handles") {
  const std::vector<double> u(16, 1.0);
  std::vector<double> half(16, 0.0);
  for (int i = 0; i < 8; ++i) half[i] = 2.0;
  jkf_density *a = nullptr, *b = nullptr, *c = nullptr;
  REQUIRE(jkf_density_create(1.0, u.data(), u.size(), &a) == JKF_OK);
  REQUIRE(jkf_density_create(1.0, half.data(), half.size(), &b) == JKF_OK);
  const std::vector<double> bad(16, 0.5);
  CHECK(jkf_density_create(1.0, bad.data(), bad.size(), &c) != JKF_OK);
  double v = 0;
  CHECK(jkf_wasserstein2(a, b, &v) == JKF_OK);
  CHECK(v == Approx(1.0 / std::sqrt(12.0)));
  CHECK(jkf_lp_distance(a, b, 1.0, &v) == JKF_OK);
  CHECK(v == Approx(1.0));
  CHECK(jkf_density_quantile(b, 0.5, &v) == JKF_OK);
  CHECK(v == Approx(0.25));
  CHECK(jkf_density_quantile(b, 2.0, &v) != JKF_OK);
  jkf_density_free(a);
  jkf_density_free(b);
}

TEST_CASE("stationary profile") {
  jkf_regime regime;
  double a = 0;
  REQUIRE(jkf_stationary_profile(1.0, &regime, &a) == JKF_OK);
  CHECK(regime == JKF_THREE_PHASE);
  CHECK(a == Approx(0.2783630385817797));
  REQUIRE(jkf_stationary_profile(0.8, &regime, &a) == JKF_OK);
  CHECK(regime == JKF_TWO_PHASE);
  REQUIRE(jkf_stationary_profile(0.6, &regime, &a) == JKF_OK);
  CHECK(regime == JKF_PURE);
  CHECK(jkf_stationary_profile(1.0, nullptr, &a) == JKF_ERR_INVALID_ARGUMENT);
  CHECK(jkf_validate_entropy(nullptr, 1000, ".", nullptr) == JKF_ERR_INVALID_ARGUMENT);
}

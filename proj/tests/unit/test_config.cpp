#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "jkoflow/config.hpp"
#include "jkoflow/error.hpp"

using namespace jkoflow;
using doctest::Approx;

namespace {

// Message of the config error raised by `text`, or "" when it parses.
std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("defaults") {
  const auto c = parse_config("{}", "x");
  CHECK(c.entropy == "log_log");
  CHECK(c.l == 1.0);
  CHECK(c.n == 512);
  CHECK(c.tau == 1e-2);
  CHECK(c.horizon == 1.0);
  CHECK(c.solver.method == SolverOptions::Method::Newton);
  CHECK(c.solver.tol_fix == 1e-8);
  CHECK(c.solver.tol_mass == 1e-12);
  CHECK(c.solver.max_iters == 5000);
  CHECK(make_initial(c).max() == Approx(1.0));
}

TEST_CASE("errors name the line and the field") {
  SUBCASE("unknown key") {
    const auto msg = config_error("{\n  \"n\": 64,\n  \"colour\": 3\n}");
    CHECK(contains(msg, "cfg.json:3:"));
    CHECK(contains(msg, "'colour'"));
  }
  SUBCASE("key unused by the chosen kind") {
    const auto msg = config_error("{\n  \"potential\": \"zero\",\n  \"potential_slope\": 2\n}");
    CHECK(contains(msg, ":3:"));
    CHECK(contains(msg, "'potential_slope'"));
  }
  SUBCASE("horizon not a multiple of tau") {
    const auto msg = config_error("{\n  \"tau\": 0.03,\n  \"horizon\": 0.1\n}");
    CHECK(contains(msg, ":3:"));
    CHECK(contains(msg, "'horizon'"));
  }
  SUBCASE("missing parameters") {
    CHECK(contains(config_error("{\"entropy\": \"log_pow\"}"), "'m'"));
    CHECK(contains(config_error("{\"entropy\": \"pow_pow\", \"m\": 3}"), "'r'"));
    CHECK(contains(config_error("{\"potential\": \"linear\"}"), "'potential_slope'"));
  }
  SUBCASE("bad values") {
    CHECK(contains(config_error("{\"n\": 8}"), "'n'"));
    CHECK(contains(config_error("{\"n\": -3}"), "'n'"));
    CHECK(contains(config_error("{\"tau\": \"big\"}"), "'tau'"));
    CHECK(contains(config_error("{\"entropy\": \"log_pow\", \"m\": 1}"), "'m'"));
    CHECK(contains(config_error("{\"method\": \"gauss\"}"), "'method'"));
    CHECK(contains(config_error("{\"damping\": 0}"), "'damping'"));
    CHECK(contains(config_error("{\"fd_epsilon\": 0.7}"), "'fd_epsilon'"));
    CHECK(contains(config_error("{\"initial\": \"spike\", \"spike_position\": 3}"), "'spike_position'"));
  }
  SUBCASE("malformed json") {
    CHECK_FALSE(config_error("{\n  \"n\": 64,\n  oops\n}").empty());
    CHECK_FALSE(config_error("[1, 2]").empty());
  }
}

TEST_CASE("fingerprint") {
  const auto a = parse_config("{\"n\": 64, \"tau\": 0.01, \"horizon\": 0.1}", "a");
  const auto b = parse_config("{\n\"horizon\": 0.1,\n  \"tau\": 0.01, \"n\": 64}", "b");
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint().size() == 16);
  auto c = a;
  c.n = 128;
  CHECK(c.fingerprint() != a.fingerprint());
  auto d = a;
  d.seed = 7;
  CHECK(d.fingerprint() != a.fingerprint());
  CHECK(d.canonical(false) == a.canonical(false));
  // Reference value of the 64-bit FNV-1a hash.
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("resolved objects") {
  SUBCASE("entropies") {
    CHECK(make_entropy(parse_config("{\"entropy\": \"pow_pow\", \"m\": 3, \"r\": 2}", "x")).family() ==
          Family::PowPow);
    const auto c = parse_config("{\"entropy\": \"log_pow\", \"m\": 2}", "x");
    const auto s = make_entropy(c);
    CHECK(s.m() == 1.0);
    CHECK(s.r() == 2.0);
    CHECK(resolved_l_exponent(c, s) > 1.0);
  }
  SUBCASE("potentials") {
    const auto c = parse_config("{\"potential\": \"quadratic\", \"potential_coefficients\": [1, 2, 3]}", "x");
    CHECK(make_potential(c).value(2.0) == Approx(17.0));
    CHECK(is_log_linear(parse_config("{\"potential\": \"linear\", \"potential_slope\": 2}", "x")));
    CHECK(is_log_linear(parse_config("{\"potential\": \"quadratic\", \"potential_coefficients\": [5, 2, 0]}", "x")));
    CHECK_FALSE(is_log_linear(parse_config("{\"potential\": \"linear\", \"potential_slope\": 1}", "x")));
  }
  SUBCASE("initial data") {
    const auto e = make_initial(parse_config("{\"n\": 64, \"initial\": \"exp_normalized\"}", "x"));
    CHECK(e.mass() == Approx(1.0).epsilon(1e-13));
    // Exact cell average of the first cell.
    const double h = 1.0 / 64;
    CHECK(e[0] == Approx((1.0 - std::exp(-h)) / h / (1.0 - std::exp(-1.0))).epsilon(1e-12));

    const auto s = make_initial(parse_config(
        "{\"n\": 500, \"initial\": \"spike\", \"spike_height\": 40, \"spike_width\": 0.02}", "x"));
    CHECK(s.max() == Approx(40.0));
    CHECK(s.mass() == Approx(1.0).epsilon(1e-12));
    CHECK(s.values().front() > 0.0);

    const auto r1 = make_initial(parse_config("{\"n\": 64, \"initial\": \"random\", \"seed\": 3}", "x"));
    const auto r2 = make_initial(parse_config("{\"n\": 64, \"initial\": \"random\", \"seed\": 3}", "x"));
    const auto r3 = make_initial(parse_config("{\"n\": 64, \"initial\": \"random\", \"seed\": 4}", "x"));
    CHECK(r1.values() == r2.values());
    CHECK(r1.values() != r3.values());
    CHECK(r1.mass() == Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("tables resolve against the config directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "jkoflow_config_test";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "phi.csv") << "x,phi\n0,0\n0.5,1\n1,2\n";
    std::ofstream rho(dir / "rho.csv");
    rho << "x,rho\n";
    for (int i = 0; i < 16; ++i) rho << (i + 0.5) / 16 << ",2\n";
    std::ofstream(dir / "run.json") << "{\"n\": 16, \"potential\": \"table\", \"potential_table\": \"phi.csv\"}";
    std::ofstream(dir / "init.json") << "{\"n\": 16, \"initial\": \"table\", \"initial_table\": \"rho.csv\"}";
    std::ofstream(dir / "missing.json") << "{\"potential\": \"table\", \"potential_table\": \"none.csv\"}";
  }
  const auto c = load_config((dir / "run.json").string());
  CHECK(make_potential(c).value(0.25) == Approx(0.5));
  const auto init = load_config((dir / "init.json").string());
  CHECK(make_initial(init).n() == 16);
  CHECK(make_initial(init)[0] == Approx(1.0));
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), Error);
  CHECK_THROWS_AS(load_config((dir / "absent.json").string()), Error);
  fs::remove_all(dir);
}

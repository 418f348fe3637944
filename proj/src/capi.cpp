#include "jkoflow/jkoflow.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "jkoflow/commands.hpp"
#include "jkoflow/config.hpp"
#include "jkoflow/density.hpp"
#include "jkoflow/entropy.hpp"
#include "jkoflow/error.hpp"
#include "jkoflow/stationary.hpp"

struct jkf_config {
  jkoflow::RunConfig cfg;
};

struct jkf_entropy {
  jkoflow::EntropySpec spec;
};

struct jkf_density {
  jkoflow::GridDensity rho;
};

namespace {

thread_local std::string g_last_error;

int fail(int status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs f, mapping exceptions to status codes.
template <class F>
int guard(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const jkoflow::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const jkoflow::StepFailure& e) {
    return fail(JKF_ERR_STEP_FAILURE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(JKF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(JKF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(JKF_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int emit(const jkoflow::CommandResult& r, char** summary_json) {
  if (summary_json) *summary_json = dup(r.summary);
  if (r.status != 0) g_last_error = "command finished with status " + std::to_string(r.status);
  return r.status;
}

#define JKF_REQUIRE(cond) \
  if (!(cond)) return fail(JKF_ERR_INVALID_ARGUMENT, "invalid argument: " #cond)

}  // namespace

extern "C" {

const char* jkf_last_error(void) { return g_last_error.c_str(); }

const char* jkf_status_name(int status) {
  switch (status) {
    case JKF_OK: return "ok";
    case JKF_ERR_DOMAIN: return "domain error";
    case JKF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case JKF_ERR_CONSTRAINT: return "constraint violation";
    case JKF_ERR_NO_SOLUTION: return "no solution";
    case JKF_ERR_STEP_FAILURE: return "step failure";
    case JKF_ERR_CFL: return "stability bound violated";
    case JKF_ERR_ORACLE: return "oracle failure";
    case JKF_ERR_IO: return "i/o error";
    case JKF_ERR_CONFIG: return "config error";
    default: return "internal error";
  }
}

void jkf_string_free(char* s) { std::free(s); }

int jkf_config_load(const char* path, jkf_config** out) {
  JKF_REQUIRE(path && out);
  return guard([&]() -> int {
    *out = new jkf_config{jkoflow::load_config(path)};
    return JKF_OK;
  });
}

int jkf_config_parse(const char* json_text, const char* base_dir, jkf_config** out) {
  JKF_REQUIRE(json_text && out);
  return guard([&]() -> int {
    *out = new jkf_config{jkoflow::parse_config(json_text, "<string>", base_dir ? base_dir : ".")};
    return JKF_OK;
  });
}

int jkf_config_set_seed(jkf_config* cfg, uint64_t seed) {
  JKF_REQUIRE(cfg);
  cfg->cfg.seed = seed;
  return JKF_OK;
}

int jkf_config_set_frames_every(jkf_config* cfg, uint64_t frames_every) {
  JKF_REQUIRE(cfg && frames_every >= 1);
  cfg->cfg.frames_every = static_cast<std::size_t>(frames_every);
  return JKF_OK;
}

int jkf_config_fingerprint(const jkf_config* cfg, char** out) {
  JKF_REQUIRE(cfg && out);
  return guard([&]() -> int {
    *out = dup(cfg->cfg.fingerprint());
    return JKF_OK;
  });
}

void jkf_config_free(jkf_config* cfg) { delete cfg; }

int jkf_run(const jkf_config* cfg, const char* out_dir, char** summary_json) {
  JKF_REQUIRE(cfg && out_dir);
  return guard([&]() -> int { return emit(jkoflow::cmd_run(cfg->cfg, out_dir), summary_json); });
}

int jkf_step(const jkf_config* cfg, const char* out_dir, char** summary_json) {
  JKF_REQUIRE(cfg && out_dir);
  return guard([&]() -> int { return emit(jkoflow::cmd_step(cfg->cfg, out_dir), summary_json); });
}

int jkf_compare(const jkf_config* cfg, size_t levels, const char* out_dir, char** summary_json) {
  JKF_REQUIRE(cfg && out_dir);
  return guard([&]() -> int { return emit(jkoflow::cmd_compare(cfg->cfg, out_dir, levels), summary_json); });
}

int jkf_contraction(const jkf_config* a, const jkf_config* b, const char* out_dir,
                    char** summary_json) {
  JKF_REQUIRE(a && b && out_dir);
  return guard([&]() -> int { return emit(jkoflow::cmd_contraction(a->cfg, b->cfg, out_dir), summary_json); });
}

int jkf_contraction_random(const jkf_config* cfg, size_t pairs, const char* out_dir,
                           char** summary_json) {
  JKF_REQUIRE(cfg && out_dir);
  return guard([&]() -> int {
    return emit(jkoflow::cmd_contraction_random(cfg->cfg, pairs, out_dir), summary_json);
  });
}

int jkf_validate_entropy(const jkf_config* cfg, size_t samples, const char* out_dir,
                         char** summary_json) {
  JKF_REQUIRE(cfg && out_dir && samples >= 100);
  return guard([&]() -> int {
    return emit(jkoflow::cmd_validate_entropy(cfg->cfg, out_dir, samples), summary_json);
  });
}

int jkf_stationary(double l, size_t n, const char* out_dir, char** summary_json) {
  JKF_REQUIRE(out_dir && n >= 1);
  return guard([&]() -> int { return emit(jkoflow::cmd_stationary(l, n, out_dir), summary_json); });
}

int jkf_entropy_create(jkf_family family, double m, double r, jkf_entropy** out) {
  JKF_REQUIRE(out);
  return guard([&]() -> int {
    using jkoflow::EntropySpec;
    switch (family) {
      case JKF_LOG_LOG: *out = new jkf_entropy{EntropySpec::log_log()}; break;
      case JKF_LOG_POW: *out = new jkf_entropy{EntropySpec::log_pow(m)}; break;
      case JKF_POW_POW_EQUAL: *out = new jkf_entropy{EntropySpec::pow_pow_equal(m)}; break;
      case JKF_POW_POW: *out = new jkf_entropy{EntropySpec::pow_pow(m, r)}; break;
      default: return fail(JKF_ERR_INVALID_ARGUMENT, "unknown entropy family");
    }
    return JKF_OK;
  });
}

void jkf_entropy_free(jkf_entropy* s) { delete s; }

int jkf_entropy_value(const jkf_entropy* s, double rho, double* out) {
  JKF_REQUIRE(s && out);
  return guard([&]() -> int {
    *out = s->spec.value(rho);
    return JKF_OK;
  });
}

int jkf_entropy_subdifferential(const jkf_entropy* s, double rho, double* lo, double* hi) {
  JKF_REQUIRE(s && lo && hi);
  return guard([&]() -> int {
    const auto iv = s->spec.subdifferential(rho);
    *lo = iv.lo;
    *hi = iv.hi;
    return JKF_OK;
  });
}

int jkf_entropy_inverse(const jkf_entropy* s, double v, double* out) {
  JKF_REQUIRE(s && out);
  return guard([&]() -> int {
    *out = s->spec.generalized_inverse(v);
    return JKF_OK;
  });
}

int jkf_entropy_l_s(const jkf_entropy* s, double rho, double p, double* out) {
  JKF_REQUIRE(s && out);
  return guard([&]() -> int {
    *out = s->spec.l_s(rho, p);
    return JKF_OK;
  });
}

int jkf_density_create(double l, const double* values, size_t n, jkf_density** out) {
  JKF_REQUIRE(values && n >= 1 && out);
  return guard([&]() -> int {
    *out = new jkf_density{jkoflow::GridDensity(l, std::vector<double>(values, values + n))};
    return JKF_OK;
  });
}

void jkf_density_free(jkf_density* d) { delete d; }

int jkf_density_quantile(const jkf_density* d, double s, double* out) {
  JKF_REQUIRE(d && out);
  return guard([&]() -> int {
    *out = jkoflow::quantile(d->rho, s);
    return JKF_OK;
  });
}

int jkf_wasserstein2(const jkf_density* a, const jkf_density* b, double* out) {
  JKF_REQUIRE(a && b && out);
  return guard([&]() -> int {
    *out = jkoflow::wasserstein2(a->rho, b->rho);
    return JKF_OK;
  });
}

int jkf_lp_distance(const jkf_density* a, const jkf_density* b, double p, double* out) {
  JKF_REQUIRE(a && b && out);
  return guard([&]() -> int {
    *out = jkoflow::lp_distance(a->rho, b->rho, p);
    return JKF_OK;
  });
}

int jkf_stationary_profile(double l, jkf_regime* regime, double* breakpoint) {
  JKF_REQUIRE(regime && breakpoint);
  return guard([&]() -> int {
    const auto p = jkoflow::stationary_log_linear(l);
    switch (p.regime()) {
      case jkoflow::StationaryProfile::Regime::ThreePhase: *regime = JKF_THREE_PHASE; break;
      case jkoflow::StationaryProfile::Regime::TwoPhase: *regime = JKF_TWO_PHASE; break;
      case jkoflow::StationaryProfile::Regime::Pure: *regime = JKF_PURE; break;
    }
    *breakpoint = p.breakpoint();
    return JKF_OK;
  });
}

}  // extern "C"

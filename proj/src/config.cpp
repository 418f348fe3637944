#include "jkoflow/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "jkoflow/error.hpp"

namespace jkoflow {

using nlohmann::json;

namespace {

std::string line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return "?";
  return std::to_string(1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  Reader(const json& doc, const std::string& text, const std::string& source)
      : doc_(doc), text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw Error(ErrorCode::kConfig,
                source_ + ":" + line_of(text_, key) + ": field '" + key + "': " + msg);
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  double number(const std::string& key) {
    used_.insert(key);
    const auto& v = doc_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    used_.insert(key);
    const auto& v = doc_.at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    used_.insert(key);
    const auto& v = doc_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::array<double, 3> triple(const std::string& key) {
    used_.insert(key);
    const auto& v = doc_.at(key);
    if (!v.is_array() || v.size() != 3) fail(key, "expected an array of three numbers");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(key, "expected an array of three numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  template <class F>
  void optional(const std::string& key, F&& read) {
    if (has(key)) read();
  }

  void unused_rejected(const std::set<std::string>& known) const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!known.count(it.key())) fail(it.key(), "unknown key");
      if (!used_.count(it.key())) fail(it.key(), "not used by the selected configuration");
    }
  }

  void mark(const std::string& key) { used_.insert(key); }

 private:
  const json& doc_;
  const std::string& text_;
  const std::string& source_;
  std::set<std::string> used_;
};

const std::set<std::string> kKnownKeys = {
    "entropy",        "m",          "r",          "entropy_table",  "l_exponent",
    "l",              "n",          "potential",  "potential_slope", "potential_coefficients",
    "potential_table", "initial",   "spike_position", "spike_width", "spike_height",
    "initial_table",  "tau",        "horizon",    "method",         "damping",
    "max_iters",      "tol_fix",    "tol_mass",   "tol_phase",      "seed",
    "frames_every",   "fd_epsilon", "fd_dt"};

std::string resolve(const RunConfig& cfg, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(cfg.base_dir) / p).string();
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string RunConfig::canonical(bool with_initial) const {
  json j;
  j["entropy"] = entropy;
  if (m) j["m"] = *m;
  if (r) j["r"] = *r;
  if (entropy == "custom") j["entropy_table"] = entropy_table;
  if (l_exponent) j["l_exponent"] = *l_exponent;
  j["l"] = l;
  j["n"] = n;
  j["potential"] = potential;
  if (potential == "linear") j["potential_slope"] = potential_slope;
  if (potential == "quadratic") j["potential_coefficients"] = potential_coefficients;
  if (potential == "table") j["potential_table"] = potential_table;
  if (with_initial) {
    j["initial"] = initial;
    if (initial == "spike") {
      j["spike_position"] = spike_position;
      j["spike_width"] = spike_width;
      j["spike_height"] = spike_height;
    }
    if (initial == "table") j["initial_table"] = initial_table;
    j["seed"] = seed;
  }
  j["tau"] = tau;
  j["horizon"] = horizon;
  j["method"] = solver.method == SolverOptions::Method::Newton ? "newton" : "picard";
  j["damping"] = solver.damping;
  j["max_iters"] = solver.max_iters;
  j["tol_fix"] = solver.tol_fix;
  j["tol_mass"] = solver.tol_mass;
  j["tol_phase"] = solver.tol_phase;
  j["frames_every"] = frames_every;
  j["fd_epsilon"] = fd_epsilon;
  j["fd_dt"] = fd_dt;
  return j.dump();
}

std::string RunConfig::fingerprint() const { return hex64(fnv1a64(canonical())); }

RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw Error(ErrorCode::kConfig, source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, source + ":1: expected a JSON object");

  RunConfig cfg;
  cfg.source = source;
  cfg.base_dir = base_dir;
  Reader rd(doc, text, source);

  rd.optional("entropy", [&] { cfg.entropy = rd.string("entropy"); });
  const auto& e = cfg.entropy;
  if (e == "log_log") {
  } else if (e == "log_pow" || e == "pow_pow_equal") {
    if (!rd.has("m")) rd.fail("m", "required by entropy '" + e + "'");
    cfg.m = rd.number("m");
  } else if (e == "pow_pow") {
    if (!rd.has("m")) rd.fail("m", "required by entropy 'pow_pow'");
    if (!rd.has("r")) rd.fail("r", "required by entropy 'pow_pow'");
    cfg.m = rd.number("m");
    cfg.r = rd.number("r");
  } else if (e == "custom") {
    if (!rd.has("entropy_table")) rd.fail("entropy_table", "required by entropy 'custom'");
    cfg.entropy_table = rd.string("entropy_table");
  } else {
    rd.fail("entropy", "unknown entropy '" + e + "'");
  }
  if (cfg.m && !(*cfg.m > 1.0)) rd.fail("m", "must exceed 1");
  if (cfg.r && !(*cfg.r > 1.0)) rd.fail("r", "must exceed 1");
  rd.optional("l_exponent", [&] {
    cfg.l_exponent = rd.number("l_exponent");
    if (!(*cfg.l_exponent > 1.0)) rd.fail("l_exponent", "must exceed 1");
  });

  rd.optional("l", [&] {
    cfg.l = rd.number("l");
    if (!(cfg.l > 0.0)) rd.fail("l", "must be positive");
  });
  rd.optional("n", [&] {
    cfg.n = static_cast<std::size_t>(rd.unsigned_integer("n"));
    if (cfg.n < 16) rd.fail("n", "must be at least 16");
  });

  rd.optional("potential", [&] { cfg.potential = rd.string("potential"); });
  const auto& p = cfg.potential;
  if (p == "zero") {
  } else if (p == "linear") {
    if (!rd.has("potential_slope")) rd.fail("potential_slope", "required by potential 'linear'");
    cfg.potential_slope = rd.number("potential_slope");
  } else if (p == "quadratic") {
    if (!rd.has("potential_coefficients"))
      rd.fail("potential_coefficients", "required by potential 'quadratic'");
    cfg.potential_coefficients = rd.triple("potential_coefficients");
  } else if (p == "table") {
    if (!rd.has("potential_table")) rd.fail("potential_table", "required by potential 'table'");
    cfg.potential_table = rd.string("potential_table");
  } else {
    rd.fail("potential", "unknown potential '" + p + "'");
  }

  rd.optional("initial", [&] { cfg.initial = rd.string("initial"); });
  const auto& in = cfg.initial;
  if (in == "uniform" || in == "exp_normalized" || in == "random") {
  } else if (in == "spike") {
    rd.optional("spike_position", [&] { cfg.spike_position = rd.number("spike_position"); });
    rd.optional("spike_width", [&] { cfg.spike_width = rd.number("spike_width"); });
    rd.optional("spike_height", [&] { cfg.spike_height = rd.number("spike_height"); });
    if (!(cfg.spike_width > 0.0)) rd.fail("spike_width", "must be positive");
    if (!(cfg.spike_height > 0.0)) rd.fail("spike_height", "must be positive");
    if (!(cfg.spike_position >= 0.0 && cfg.spike_position <= cfg.l))
      rd.fail("spike_position", "must lie in [0, l]");
  } else if (in == "table") {
    if (!rd.has("initial_table")) rd.fail("initial_table", "required by initial 'table'");
    cfg.initial_table = rd.string("initial_table");
  } else {
    rd.fail("initial", "unknown initial '" + in + "'");
  }

  rd.optional("tau", [&] {
    cfg.tau = rd.number("tau");
    if (!(cfg.tau > 0.0)) rd.fail("tau", "must be positive");
  });
  rd.optional("horizon", [&] {
    cfg.horizon = rd.number("horizon");
    if (!(cfg.horizon > 0.0)) rd.fail("horizon", "must be positive");
  });
  {
    const double ratio = cfg.horizon / cfg.tau;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
      rd.fail(rd.has("horizon") ? "horizon" : "tau", "horizon / tau must be an integer");
  }

  rd.optional("method", [&] {
    const auto mth = rd.string("method");
    if (mth == "newton") {
      cfg.solver.method = SolverOptions::Method::Newton;
    } else if (mth == "picard") {
      cfg.solver.method = SolverOptions::Method::Picard;
    } else {
      rd.fail("method", "expected 'newton' or 'picard'");
    }
  });
  rd.optional("damping", [&] {
    cfg.solver.damping = rd.number("damping");
    if (!(cfg.solver.damping > 0.0 && cfg.solver.damping <= 1.0))
      rd.fail("damping", "must lie in (0, 1]");
  });
  rd.optional("max_iters", [&] {
    const auto v = rd.unsigned_integer("max_iters");
    if (v < 1 || v > 10000000) rd.fail("max_iters", "must lie in [1, 1e7]");
    cfg.solver.max_iters = static_cast<int>(v);
  });
  for (auto [key, dst] : {std::pair{"tol_fix", &cfg.solver.tol_fix},
                          std::pair{"tol_mass", &cfg.solver.tol_mass}}) {
    rd.optional(key, [&, key = key, dst = dst] {
      *dst = rd.number(key);
      if (!(*dst > 0.0)) rd.fail(key, "must be positive");
    });
  }
  rd.optional("tol_phase", [&] {
    cfg.solver.tol_phase = rd.number("tol_phase");
    if (!(cfg.solver.tol_phase >= 0.0)) rd.fail("tol_phase", "must be nonnegative");
  });

  rd.optional("seed", [&] { cfg.seed = rd.unsigned_integer("seed"); });
  rd.optional("frames_every", [&] {
    cfg.frames_every = static_cast<std::size_t>(rd.unsigned_integer("frames_every"));
    if (cfg.frames_every < 1) rd.fail("frames_every", "must be at least 1");
  });
  rd.optional("fd_epsilon", [&] {
    cfg.fd_epsilon = rd.number("fd_epsilon");
    if (!(cfg.fd_epsilon > 0.0 && cfg.fd_epsilon < 0.5)) rd.fail("fd_epsilon", "must lie in (0, 0.5)");
  });
  rd.optional("fd_dt", [&] {
    cfg.fd_dt = rd.number("fd_dt");
    if (!(cfg.fd_dt >= 0.0)) rd.fail("fd_dt", "must be nonnegative");
  });

  rd.unused_rejected(kKnownKeys);

  // Table-backed pieces are validated now so errors surface at parse time.
  try {
    if (cfg.potential == "table") {
      const auto phi = make_potential(cfg);
      (void)phi;
    }
    if (cfg.entropy == "custom") (void)make_entropy(cfg);
  } catch (const Error& err) {
    throw Error(ErrorCode::kConfig, source + ": " + err.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path().string();
  if (dir.empty()) dir = ".";
  return parse_config(ss.str(), path, dir);
}

EntropySpec make_entropy(const RunConfig& cfg) {
  if (cfg.entropy == "log_log") return EntropySpec::log_log();
  if (cfg.entropy == "log_pow") return EntropySpec::log_pow(*cfg.m);
  if (cfg.entropy == "pow_pow_equal") return EntropySpec::pow_pow_equal(*cfg.m);
  if (cfg.entropy == "pow_pow") return EntropySpec::pow_pow(*cfg.m, *cfg.r);
  if (cfg.entropy == "custom") return EntropySpec::custom(load_custom_table(resolve(cfg, cfg.entropy_table)));
  throw Error(ErrorCode::kConfig, "unknown entropy '" + cfg.entropy + "'");
}

Potential make_potential(const RunConfig& cfg) {
  if (cfg.potential == "zero") return Potential::zero();
  if (cfg.potential == "linear") return Potential::linear(cfg.potential_slope);
  if (cfg.potential == "quadratic") {
    const auto& c = cfg.potential_coefficients;
    return Potential::quadratic(c[0], c[1], c[2]);
  }
  if (cfg.potential == "table") return Potential::load_table(resolve(cfg, cfg.potential_table));
  throw Error(ErrorCode::kConfig, "unknown potential '" + cfg.potential + "'");
}

GridDensity make_initial(const RunConfig& cfg) {
  const std::size_t n = cfg.n;
  const double l = cfg.l;
  const double h = l / static_cast<double>(n);
  std::vector<double> v(n);
  if (cfg.initial == "uniform") return GridDensity::uniform(l, n);
  if (cfg.initial == "exp_normalized") {
    // Exact cell averages of e^(-x) / (1 - e^(-l)).
    const double z = -std::expm1(-l);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = static_cast<double>(i) * h;
      v[i] = std::exp(-a) * -std::expm1(-h) / (h * z);
    }
    return GridDensity::normalized(l, std::move(v));
  }
  if (cfg.initial == "spike") {
    const double lo = cfg.spike_position - 0.5 * cfg.spike_width;
    const double hi = cfg.spike_position + 0.5 * cfg.spike_width;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      if (x >= lo - 1e-12 * l && x <= hi + 1e-12 * l) {
        v[i] = cfg.spike_height;
        ++inside;
      }
    }
    require(inside > 0, ErrorCode::kConfig, "spike covers no cell centre");
    const double spike_mass = cfg.spike_height * h * static_cast<double>(inside);
    require(spike_mass <= 1.0 + 1e-9, ErrorCode::kConfig, "spike carries more than unit mass");
    if (inside < n) {
      const double background = std::max(0.0, 1.0 - spike_mass) / (h * static_cast<double>(n - inside));
      for (auto& x : v)
        if (x == 0.0) x = background;
    }
    return GridDensity::normalized(l, std::move(v));
  }
  if (cfg.initial == "random") {
    // A positive floor plus four Gaussian bumps.
    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<double, 4> amp{}, centre{}, width{};
    for (int j = 0; j < 4; ++j) {
      amp[j] = 0.5 + 2.5 * unit(gen);
      centre[j] = l * unit(gen);
      width[j] = l * (0.03 + 0.17 * unit(gen));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      double s = 0.2;
      for (int j = 0; j < 4; ++j) {
        const double d = (x - centre[j]) / width[j];
        s += amp[j] * std::exp(-0.5 * d * d);
      }
      v[i] = s;
    }
    return GridDensity::normalized(l, std::move(v));
  }
  if (cfg.initial == "table") {
    auto loaded = load_density_csv(resolve(cfg, cfg.initial_table));
    require(loaded.density.n() == n && std::abs(loaded.density.l() - l) <= 1e-9 * l,
            ErrorCode::kConfig, "initial table does not match the configured grid (l, n)");
    return std::move(loaded.density);
  }
  throw Error(ErrorCode::kConfig, "unknown initial '" + cfg.initial + "'");
}

double resolved_l_exponent(const RunConfig& cfg, const EntropySpec& spec) {
  if (cfg.l_exponent) return *cfg.l_exponent;
  return default_l_exponent(summability_beta(1, spec.r()));
}

bool is_log_linear(const RunConfig& cfg) {
  return cfg.entropy == "log_log" &&
         ((cfg.potential == "linear" && cfg.potential_slope == 2.0) ||
          (cfg.potential == "quadratic" && cfg.potential_coefficients[1] == 2.0 &&
           cfg.potential_coefficients[2] == 0.0));
}

}  // namespace jkoflow

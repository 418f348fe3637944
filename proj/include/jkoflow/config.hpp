#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "jkoflow/density.hpp"
#include "jkoflow/entropy.hpp"
#include "jkoflow/jko.hpp"
#include "jkoflow/potential.hpp"

namespace jkoflow {

/// Flat JSON run configuration. Every key is optional except where the chosen
/// entropy, potential or initial kind needs a parameter; unknown keys and keys
/// that the chosen kinds do not use are rejected.
struct RunConfig {
  std::string source;    // file the config came from, for messages
  std::string base_dir;  // relative table paths resolve against this

  std::string entropy = "log_log";  // log_log | log_pow | pow_pow_equal | pow_pow | custom
  std::optional<double> m, r;
  std::string entropy_table;
  std::optional<double> l_exponent;

  double l = 1.0;
  std::size_t n = 512;

  std::string potential = "zero";  // zero | linear | quadratic | table
  double potential_slope = 0.0;
  std::array<double, 3> potential_coefficients{0.0, 0.0, 0.0};
  std::string potential_table;

  std::string initial = "uniform";  // uniform | exp_normalized | spike | random | table
  double spike_position = 0.5;
  double spike_width = 0.02;
  double spike_height = 50.0;
  std::string initial_table;

  double tau = 1e-2;
  double horizon = 1.0;
  SolverOptions solver;

  std::uint64_t seed = 0;
  std::size_t frames_every = 1;

  double fd_epsilon = 1e-2;
  double fd_dt = 0.0;

  /// Canonical JSON of every resolved field and its FNV-1a 64 hash. Without
  /// `with_initial` the initial-data keys and the seed are left out.
  std::string canonical(bool with_initial = true) const;
  std::string fingerprint() const;
};

/// Parses config text; errors carry kConfig and name the line and field.
RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Resolved objects. Tables are loaded relative to base_dir.
EntropySpec make_entropy(const RunConfig& cfg);
Potential make_potential(const RunConfig& cfg);
/// Initial density; `random` draws from a generator seeded with cfg.seed.
GridDensity make_initial(const RunConfig& cfg);
/// Splitting exponent: the configured one or the default for the entropy.
double resolved_l_exponent(const RunConfig& cfg, const EntropySpec& spec);

/// True when the config is the log-log entropy with Phi = 2x (up to a
/// constant), the case with closed-form stationary solutions.
bool is_log_linear(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace jkoflow

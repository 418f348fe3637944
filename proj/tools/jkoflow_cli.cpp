// Command-line front end; talks to the library only through the C API.
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "jkoflow/jkoflow.h"

namespace {

constexpr int kCheckFailed = 10;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> frames_every;
};

int report(int status, char*& summary) {
  if (summary) {
    std::fputs(summary, stdout);
    jkf_string_free(summary);
    summary = nullptr;
  }
  if (status != JKF_OK) {
    std::fprintf(stderr, "error (%s): %s\n", jkf_status_name(status), jkf_last_error());
  }
  return status;
}

// Owning wrapper so every exit path frees the handle.
struct Config {
  jkf_config* h = nullptr;
  ~Config() { jkf_config_free(h); }
};

int load(const std::string& path, const Overrides& o, Config& out) {
  int st = jkf_config_load(path.c_str(), &out.h);
  char* none = nullptr;
  if (st != JKF_OK) return report(st, none);
  if (o.seed) jkf_config_set_seed(out.h, *o.seed);
  if (o.frames_every) {
    st = jkf_config_set_frames_every(out.h, *o.frames_every);
    if (st != JKF_OK) return report(st, none);
  }
  return JKF_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimizing-movement solver for diffusion with a jump in intensity at density 1"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  Overrides ov;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", ov.seed, "Seed for randomized initial data");
  app.add_option("--frames-every", ov.frames_every, "Store every k-th frame")
      ->check(CLI::PositiveNumber);

  std::string cfg1, cfg2;
  double l = 1.0;
  std::size_t n = 512, levels = 1, pairs = 0, samples = 1000;

  auto* run = app.add_subcommand("run", "Run a trajectory and write frames, ledger and diagnostics");
  run->add_option("config", cfg1)->required();
  auto* stat = app.add_subcommand("stationary", "Write the analytic stationary profile");
  stat->add_option("--l", l, "Domain length")->required();
  stat->add_option("--n", n, "Number of sample points")->capture_default_str();
  auto* cmp = app.add_subcommand("compare", "Compare JKO with the finite-volume solver");
  cmp->add_option("config", cfg1)->required();
  cmp->add_option("--levels", levels, "Refinement levels (n, 2n, 4n, ...)")->capture_default_str();
  auto* con = app.add_subcommand("contraction", "L1 contraction between two runs");
  con->add_option("config1", cfg1)->required();
  con->add_option("config2", cfg2);
  con->add_option("--random-pairs", pairs, "Seeded random initial pairs instead of config2");
  auto* val = app.add_subcommand("validate-entropy", "Check the entropy assumptions");
  val->add_option("config", cfg1)->required();
  val->add_option("--samples", samples)->capture_default_str();
  auto* stp = app.add_subcommand("step", "Dump a single minimizing-movement step");
  stp->add_option("config", cfg1)->required();

  for (auto* sub : {run, stat, cmp, con, val, stp}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  char* summary = nullptr;
  if (stat->parsed()) {
    const int st = jkf_stationary(l, n, out_dir.c_str(), &summary);
    return report(st, summary);
  }

  Config a;
  if (int st = load(cfg1, ov, a); st != JKF_OK) return st;

  if (run->parsed()) {
    const int st = jkf_run(a.h, out_dir.c_str(), &summary);
    return report(st, summary);
  }
  if (stp->parsed()) {
    const int st = jkf_step(a.h, out_dir.c_str(), &summary);
    return report(st, summary);
  }
  if (val->parsed()) {
    const int st = jkf_validate_entropy(a.h, samples, out_dir.c_str(), &summary);
    return report(st, summary);
  }
  if (cmp->parsed()) {
    const int st = jkf_compare(a.h, levels, out_dir.c_str(), &summary);
    return report(st, summary);
  }

  // contraction
  int st;
  if (pairs > 0) {
    if (!cfg2.empty()) {
      std::fprintf(stderr, "error: give either config2 or --random-pairs\n");
      return JKF_ERR_INVALID_ARGUMENT;
    }
    st = jkf_contraction_random(a.h, pairs, out_dir.c_str(), &summary);
  } else {
    if (cfg2.empty()) {
      std::fprintf(stderr, "error: contraction needs config2 or --random-pairs\n");
      return JKF_ERR_INVALID_ARGUMENT;
    }
    Config b;
    if (int s2 = load(cfg2, ov, b); s2 != JKF_OK) return s2;
    st = jkf_contraction(a.h, b.h, out_dir.c_str(), &summary);
  }
  bool pass = false;
  if (st == JKF_OK && summary) pass = nlohmann::json::parse(summary).value("pass", false);
  st = report(st, summary);
  if (st == JKF_OK && !pass) return kCheckFailed;
  return st;
}

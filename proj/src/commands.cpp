#include "jkoflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <limits>
#include <thread>

#include "json.hpp"
#include "jkoflow/artifacts.hpp"
#include "jkoflow/diagnostics.hpp"
#include "jkoflow/error.hpp"
#include "jkoflow/pde_fd.hpp"
#include "jkoflow/stationary.hpp"

namespace jkoflow {

using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

FluxColumn jko_flux(const EntropySpec& spec) {
  return [&spec](double rho, double p) {
    try {
      return spec.l_s(rho, p);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
}

CommandResult finish(const std::string& out_dir, const std::string& name, const json& summary,
                     int status = 0) {
  const std::string text = summary.dump(2) + "\n";
  write_text(join(out_dir, name), text);
  return {status, text};
}

struct Prepared {
  EntropySpec spec;
  Potential phi;
  GridDensity rho0;
};

Prepared prepare(const RunConfig& cfg) {
  return {make_entropy(cfg), make_potential(cfg), make_initial(cfg)};
}

Trajectory trajectory_for(const RunConfig& cfg, const Prepared& p, std::size_t frames_every) {
  auto traj = run_trajectory(p.spec, p.phi, p.rho0, cfg.tau, cfg.horizon, cfg.solver, frames_every);
  traj.fingerprint = cfg.fingerprint();
  return traj;
}

json entropy_meta(const RunConfig& cfg, const EntropySpec& spec) {
  const double beta = summability_beta(1, spec.r());
  return {{"family", to_string(spec.family())},
          {"m", spec.m()},
          {"r", spec.r()},
          {"sigma1", spec.sigma1()},
          {"sigma2", spec.sigma2()},
          {"s_prime_0", number_or_null(spec.s_prime_0())},
          {"s_prime_1_minus", spec.s_prime_1_minus()},
          {"s_prime_1_plus", spec.s_prime_1_plus()},
          {"s_at_1", spec.s_at_1()},
          {"positivity_expected", spec.positivity_expected()},
          {"beta_nominal", number_or_null(beta)},
          {"l_exponent", resolved_l_exponent(cfg, spec)}};
}

}  // namespace

double contraction_slack(double l, std::size_t n) {
  return 1e-3 + 4.0 * l / static_cast<double>(n);
}

CommandResult cmd_run(const RunConfig& cfg, const std::string& out_dir) {
  const auto p = prepare(cfg);
  const auto fp = cfg.fingerprint();
  const auto traj = trajectory_for(cfg, p, cfg.frames_every);
  const auto diags = trajectory_diagnostics(p.spec, p.phi, traj);

  write_text(join(out_dir, "frames.csv"), frames_csv(traj, jko_flux(p.spec), fp));
  write_text(join(out_dir, "ledger.json"), ledger_json(traj, fp));
  write_text(join(out_dir, "diagnostics.json"), diagnostics_json(diags, fp));

  json summary = {{"fingerprint", fp},
                  {"config", json::parse(cfg.canonical())},
                  {"entropy", entropy_meta(cfg, p.spec)},
                  {"steps", traj.ledger.empty() ? 0 : traj.ledger.back().k},
                  {"frames", traj.frames.size()},
                  {"boundary_flag", p.phi.boundary_condition_holds(cfg.l)}};
  std::size_t failed = 0;
  for (const auto& d : diags) failed += d.status == "fail";
  summary["diagnostics_failed"] = failed;
  if (traj.failure) {
    summary["failure"] = {{"k", traj.failure->k},
                          {"message", traj.failure->message},
                          {"residual", traj.failure->residual}};
  } else {
    summary["failure"] = nullptr;
  }
  return finish(out_dir, "run.json", summary,
                traj.failure ? static_cast<int>(ErrorCode::kStepFailure) : 0);
}

CommandResult cmd_step(const RunConfig& cfg, const std::string& out_dir) {
  const auto p = prepare(cfg);
  const auto fp = cfg.fingerprint();
  const auto r = jko_step(p.spec, p.phi, p.rho0, cfg.tau, cfg.solver);
  const auto ls = jko_flux(p.spec);

  std::string csv = "# fingerprint=" + fp + "\nx,rho_prev,rho,p,ls,potential,velocity\n";
  for (std::size_t i = 0; i < r.rho_new.n(); ++i) {
    csv += format_number(r.rho_new.center(i)) + "," + format_number(p.rho0[i]) + "," +
           format_number(r.rho_new[i]) + "," + format_number(r.pressure[i]) + "," +
           format_number(ls(r.rho_new[i], r.pressure[i])) + "," + format_number(r.potential[i]) +
           "," + format_number(r.velocity[i]) + "\n";
  }
  write_text(join(out_dir, "step.csv"), csv);

  const auto part = phase_partition(r.rho_new, cfg.solver.tol_phase);
  const double lo = p.spec.s_prime_1_minus(), hi = p.spec.s_prime_1_plus();
  double p_min = std::numeric_limits<double>::infinity(), p_max = -p_min;
  bool interior = false;
  for (auto i : part.plateau_cells) {
    p_min = std::min(p_min, r.pressure[i]);
    p_max = std::max(p_max, r.pressure[i]);
    interior = interior || (r.pressure[i] > lo && r.pressure[i] < hi);
  }
  json summary = {{"fingerprint", fp},
                  {"method", r.method},
                  {"iterations", r.iterations},
                  {"optimality_residual", r.optimality_residual},
                  {"mass_residual", r.mass_residual},
                  {"mass_constant", r.mass_constant},
                  {"w2_step", r.w2_step},
                  {"energy_before", energy(p.spec, p.phi, p.rho0)},
                  {"energy_after", energy(p.spec, p.phi, r.rho_new)},
                  {"phases",
                   {{"tol_phase", cfg.solver.tol_phase},
                    {"below", part.below},
                    {"plateau", part.plateau},
                    {"above", part.above}}},
                  {"plateau_pressure_min", number_or_null(p_min)},
                  {"plateau_pressure_max", number_or_null(p_max)},
                  {"plateau_pressure_interior", interior}};
  return finish(out_dir, "step.json", summary);
}

CommandResult cmd_compare(const RunConfig& cfg, const std::string& out_dir, std::size_t levels) {
  require(levels >= 1 && levels <= 6, ErrorCode::kInvalidArgument, "levels must lie in [1, 6]");
  json level_reports = json::array();
  std::vector<double> final_distances;
  for (std::size_t j = 0; j < levels; ++j) {
    RunConfig c = cfg;
    const double scale = std::ldexp(1.0, static_cast<int>(j));
    c.n = cfg.n * (std::size_t{1} << j);
    c.tau = cfg.tau / scale;
    c.fd_epsilon = cfg.fd_epsilon / scale;
    c.frames_every = cfg.frames_every * (std::size_t{1} << j);
    c.fd_dt = j == 0 ? cfg.fd_dt : 0.0;
    const auto p = prepare(c);
    const auto fp = c.fingerprint();
    const auto jko = trajectory_for(c, p, c.frames_every);

    FdOptions fo;
    fo.epsilon = c.fd_epsilon;
    fo.dt = c.fd_dt;
    const double interval = c.tau * static_cast<double>(c.frames_every);
    const double count = c.horizon / interval;
    if (std::abs(count - std::round(count)) <= 1e-9 * std::max(1.0, count)) fo.frame_interval = interval;
    const auto fd = fd_run(p.spec, p.phi, p.rho0, c.horizon, fo);

    const std::string dir = levels == 1 ? out_dir : join(out_dir, "level" + std::to_string(j));
    write_text(join(dir, "frames_jko.csv"), frames_csv(jko, jko_flux(p.spec), fp));
    const RegularizedFlux reg(p.spec, c.fd_epsilon);
    write_text(join(dir, "frames_fd.csv"),
               frames_csv(fd.trajectory, [&reg](double rho, double) { return reg.value(rho); }, fp));

    json matched = json::array();
    for (const auto& fj : jko.frames) {
      for (const auto& ff : fd.trajectory.frames) {
        if (std::abs(ff.t - fj.t) <= 1e-9 * std::max(1.0, c.horizon)) {
          matched.push_back({{"t", fj.t}, {"jko_fd_l1", lp_distance(fj.rho, ff.rho, 1.0)}});
          break;
        }
      }
    }
    const auto& last_jko = jko.frames.back().rho;
    const auto& last_fd = fd.trajectory.frames.back().rho;
    const double d = lp_distance(last_jko, last_fd, 1.0);
    json fin = {{"t", jko.frames.back().t}, {"jko_fd_l1", d}};
    if (is_log_linear(c)) {
      const auto oracle = stationary_log_linear(c.l).cell_averages(c.n);
      fin["jko_stationary_l1"] = lp_distance(last_jko, oracle, 1.0);
      fin["fd_stationary_l1"] = lp_distance(last_fd, oracle, 1.0);
    }
    json rep = {{"fingerprint", fp},
                {"n", c.n},
                {"tau", c.tau},
                {"fd_epsilon", c.fd_epsilon},
                {"fd_dt", fd.dt},
                {"fd_steps", fd.steps},
                {"fd_max_mass_error", fd.max_mass_error},
                {"matched", matched},
                {"final", fin}};
    if (jko.failure) {
      rep["jko_failure"] = {{"k", jko.failure->k}, {"message", jko.failure->message}};
    } else {
      rep["jko_failure"] = nullptr;
    }
    level_reports.push_back(rep);
    final_distances.push_back(d);
  }
  bool monotone = true;
  for (std::size_t j = 1; j < final_distances.size(); ++j)
    monotone = monotone && final_distances[j] < final_distances[j - 1];
  json summary = {{"fingerprint", cfg.fingerprint()}, {"levels", level_reports}};
  if (levels > 1) {
    summary["monotone_refinement"] = monotone;
  } else {
    summary["monotone_refinement"] = nullptr;
  }
  return finish(out_dir, "compare.json", summary);
}

namespace {

json contraction_pair(const RunConfig& a, const RunConfig& b) {
  const auto pa = prepare(a);
  const auto pb = prepare(b);
  const auto ta = trajectory_for(a, pa, a.frames_every);
  const auto tb = trajectory_for(b, pb, b.frames_every);
  json j = {{"fingerprint_a", a.fingerprint()},
            {"fingerprint_b", b.fingerprint()},
            {"initial_l1", lp_distance(pa.rho0, pb.rho0, 1.0)},
            {"violation", contraction_check(ta, tb)}};
  j["failed_runs"] = static_cast<int>(ta.failure.has_value()) + static_cast<int>(tb.failure.has_value());
  return j;
}

}  // namespace

CommandResult cmd_contraction(const RunConfig& a, const RunConfig& b, const std::string& out_dir) {
  require(a.canonical(false) == b.canonical(false), ErrorCode::kConfig,
          "contraction configs must agree in everything but the initial data");
  const auto pair = contraction_pair(a, b);
  const double slack = contraction_slack(a.l, a.n);
  const double v = pair["violation"].get<double>();
  json summary = {{"pairs", json::array({pair})},
                  {"worst_violation", v},
                  {"slack", slack},
                  {"pass", v <= slack && pair["failed_runs"].get<int>() == 0}};
  return finish(out_dir, "contraction.json", summary);
}

CommandResult cmd_contraction_random(const RunConfig& cfg, std::size_t pairs,
                                     const std::string& out_dir) {
  require(pairs >= 1, ErrorCode::kInvalidArgument, "need at least one pair");
  auto config_for = [&cfg](std::uint64_t seed) {
    RunConfig c = cfg;
    c.initial = "random";
    c.seed = seed;
    return c;
  };
  // Pairs are independent; run them on a small pool of async tasks.
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<json> results(pairs);
  for (std::size_t start = 0; start < pairs; start += workers) {
    std::vector<std::future<json>> batch;
    for (std::size_t j = start; j < std::min(pairs, start + workers); ++j) {
      batch.push_back(std::async(std::launch::async, [&, j] {
        return contraction_pair(config_for(cfg.seed + 2 * j), config_for(cfg.seed + 2 * j + 1));
      }));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) results[start + j] = batch[j].get();
  }
  double worst = -std::numeric_limits<double>::infinity();
  int failed = 0;
  for (const auto& r : results) {
    worst = std::max(worst, r["violation"].get<double>());
    failed += r["failed_runs"].get<int>();
  }
  const double slack = contraction_slack(cfg.l, cfg.n);
  json summary = {{"fingerprint", cfg.fingerprint()},
                  {"pairs", results},
                  {"worst_violation", worst},
                  {"slack", slack},
                  {"pass", worst <= slack && failed == 0}};
  return finish(out_dir, "contraction.json", summary);
}

CommandResult cmd_validate_entropy(const RunConfig& cfg, const std::string& out_dir,
                                   std::size_t samples) {
  const auto spec = make_entropy(cfg);
  const auto report = validate_assumptions(spec, samples);
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"status", to_string(c.status)},
                      {"worst_margin", number_or_null(c.worst_margin)},
                      {"at_rho", c.at_rho}});
  }
  const double l = resolved_l_exponent(cfg, spec);
  const auto dec = decompose(spec, l);
  // Worst gap between S and S_a + S_b on the check grid.
  double split_gap = 0.0;
  for (double rho : {0.3, 0.7, 1.0, 1.5, 2.7}) {
    split_gap = std::max(split_gap, std::abs(dec.s_a(rho) + dec.s_b(rho) - spec.value(rho)));
  }
  json summary = {{"fingerprint", cfg.fingerprint()},
                  {"entropy", entropy_meta(cfg, spec)},
                  {"samples", samples},
                  {"passed", report.passed()},
                  {"checks", checks},
                  {"decomposition",
                   {{"form", dec.form() == EntropyDecomposition::Form::Log ? "log" : "power"},
                    {"l_exponent", l},
                    {"split_gap", split_gap}}}};
  return finish(out_dir, "entropy.json", summary);
}

CommandResult cmd_stationary(double l, std::size_t n, const std::string& out_dir) {
  const auto profile = stationary_log_linear(l);
  const json key = {{"command", "stationary"}, {"l", l}, {"n", n}};
  const std::string fp = hex64(fnv1a64(key.dump()));
  write_text(join(out_dir, "stationary.csv"), stationary_csv(profile, n, fp));
  json plateau = nullptr;
  if (auto pl = profile.plateau()) plateau = {pl->first, pl->second};
  json summary = {{"fingerprint", fp},
                  {"l", l},
                  {"n", n},
                  {"regime", to_string(profile.regime())},
                  {"A", profile.breakpoint()},
                  {"pressure_constant", profile.pressure_constant()},
                  {"plateau", plateau},
                  {"mass_error", profile.integral(0.0, l) - 1.0},
                  {"three_phase_threshold", three_phase_threshold()},
                  {"two_phase_threshold", two_phase_threshold()}};
  return finish(out_dir, "stationary.json", summary);
}

}  // namespace jkoflow

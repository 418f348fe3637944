#include "jkoflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jkoflow/error.hpp"
#include "jkoflow/stationary.hpp"

namespace jkoflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string at_frame(const Frame& f) {
  std::ostringstream s;
  s.precision(10);
  s << "k=" << f.k << " t=" << f.t;
  return s.str();
}

std::string at_frame(const Frame& f, double x) {
  std::ostringstream s;
  s.precision(10);
  s << "k=" << f.k << " t=" << f.t << " x=" << x;
  return s.str();
}

DiagnosticEntry entry(std::string name, bool ok, double worst, std::string location,
                      std::vector<std::pair<std::string, double>> tol,
                      const char* bad_status = "fail") {
  return {std::move(name), ok ? "pass" : bad_status, worst, std::move(location), std::move(tol)};
}

}  // namespace

PhasePartition phase_partition(const GridDensity& rho, double tol_phase) {
  require(tol_phase >= 0.0, ErrorCode::kInvalidArgument, "tol_phase must be nonnegative");
  PhasePartition p;
  p.tol_phase = tol_phase;
  for (std::size_t i = 0; i < rho.n(); ++i) {
    if (std::abs(rho[i] - 1.0) <= tol_phase) {
      p.plateau_cells.push_back(i);
    } else if (rho[i] < 1.0) {
      p.below_cells.push_back(i);
    } else {
      p.above_cells.push_back(i);
    }
  }
  const double h = rho.h();
  p.below = h * static_cast<double>(p.below_cells.size());
  p.plateau = h * static_cast<double>(p.plateau_cells.size());
  p.above = h * static_cast<double>(p.above_cells.size());
  return p;
}

EmergenceResult emergence_check(const Trajectory& traj, double tol_phase) {
  require(!traj.frames.empty(), ErrorCode::kInvalidArgument, "trajectory has no frames");
  EmergenceResult out;
  for (std::size_t k = 0; k < traj.frames.size(); ++k) {
    const auto& rho = traj.frames[k].rho;
    const auto part = phase_partition(rho, tol_phase);
    const bool whole = part.plateau_cells.size() == rho.n();
    const bool both = part.below > 0.0 && part.above > 0.0;
    if (part.plateau > 2.0 * rho.h() && (both || whole)) {
      out.time = traj.frames[k].t;
      out.frame = traj.frames[k].k;
      out.both_phases = both;
      return out;
    }
  }
  return out;
}

double contraction_check(const Trajectory& a, const Trajectory& b) {
  require(!a.frames.empty() && !b.frames.empty(), ErrorCode::kInvalidArgument,
          "trajectories have no frames");
  require(a.tau == b.tau, ErrorCode::kInvalidArgument, "trajectories use different tau");
  const auto& a0 = a.frames.front().rho;
  const auto& b0 = b.frames.front().rho;
  require(a0.n() == b0.n() && a0.l() == b0.l(), ErrorCode::kInvalidArgument,
          "trajectories live on different grids");
  const double d0 = lp_distance(a0, b0, 1.0);
  double worst = 0.0;
  std::size_t j = 0;
  for (const auto& fa : a.frames) {
    while (j < b.frames.size() && b.frames[j].k < fa.k) ++j;
    if (j == b.frames.size()) break;
    if (b.frames[j].k != fa.k) continue;
    worst = std::max(worst, lp_distance(fa.rho, b.frames[j].rho, 1.0) - d0);
  }
  return worst;
}

std::optional<HarmonicityResult> plateau_harmonicity(const GridDensity& rho,
                                                     const std::vector<double>& p,
                                                     const Potential& phi, double tol_phase) {
  require(p.size() == rho.n(), ErrorCode::kInvalidArgument, "pressure and density sizes differ");
  const std::size_t n = rho.n();
  const double h = rho.h();
  auto on = [&](std::size_t i) { return std::abs(rho[i] - 1.0) <= tol_phase; };
  const auto samples = phi.sample_centers(rho.l(), n);
  std::optional<HarmonicityResult> out;
  std::size_t interior = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(on(i - 1) && on(i) && on(i + 1))) continue;
    ++interior;
    const double d2p = p[i + 1] - 2.0 * p[i] + p[i - 1];
    const double d2phi = samples[i + 1] - 2.0 * samples[i] + samples[i - 1];
    const double r = std::abs(d2p + d2phi) / (h * h);
    if (!out || r > out->worst) out = HarmonicityResult{r, rho.center(i)};
  }
  if (interior < 3) return std::nullopt;
  return out;
}

std::vector<FluxJump> flux_jump_check(const GridDensity& rho, const std::vector<double>& p,
                                      const EntropySpec& spec, double tol_phase) {
  require(p.size() == rho.n(), ErrorCode::kInvalidArgument, "pressure and density sizes differ");
  const std::size_t n = rho.n();
  const double h = rho.h();
  std::vector<double> ls(n);
  std::vector<bool> on(n);
  for (std::size_t i = 0; i < n; ++i) {
    on[i] = std::abs(rho[i] - 1.0) <= tol_phase;
    // Plateau cells within tol_phase of 1 carry the pressure as flux.
    ls[i] = on[i] ? p[i] : spec.flux(rho[i]);
  }
  std::vector<FluxJump> out;
  for (std::size_t b = 2; b + 1 < n; ++b) {
    if (on[b - 1] == on[b]) continue;
    // Cells b-2, b-1 lie on one side, b, b+1 on the other.
    if (on[b - 2] != on[b - 1] || on[b] != on[b + 1]) continue;
    const double left = (ls[b - 1] - ls[b - 2]) / h;
    const double right = (ls[b + 1] - ls[b]) / h;
    FluxJump j;
    j.position = rho.face(b);
    j.slope_plateau = on[b] ? right : left;
    j.slope_outer = on[b] ? left : right;
    j.mismatch = std::abs(j.slope_plateau) - std::abs(j.slope_outer);
    out.push_back(j);
  }
  return out;
}

SummabilityReport summability(const Trajectory& traj, const EntropySpec& spec) {
  SummabilityReport r;
  r.beta_nominal = summability_beta(1, spec.r());
  for (const auto& f : traj.frames) {
    const double sup = f.rho.max();
    double l2 = 0.0;
    for (double v : f.rho.values()) l2 += v * v;
    l2 = std::sqrt(f.rho.h() * l2);
    r.sup_norms.push_back(sup);
    r.l2_norms.push_back(l2);
    r.all_finite = r.all_finite && std::isfinite(sup) && std::isfinite(l2);
  }
  return r;
}

bool linf_bound_armed(const Potential& phi, double l) {
  return phi.is_constant() || phi.boundary_condition_holds(l);
}

std::vector<DiagnosticEntry> trajectory_diagnostics(const EntropySpec& spec, const Potential& phi,
                                                    const Trajectory& traj,
                                                    const DiagnosticOptions& opts) {
  require(!traj.frames.empty(), ErrorCode::kInvalidArgument, "trajectory has no frames");
  std::vector<DiagnosticEntry> out;
  const auto& first = traj.frames.front();
  const auto& last = traj.frames.back();
  const double lo = spec.s_prime_1_minus(), hi = spec.s_prime_1_plus();
  const bool has_pressure = std::isfinite(last.pressure.empty() ? kNaN : last.pressure[0]);

  if (traj.failure) {
    std::ostringstream loc;
    loc << "k=" << traj.failure->k << ": " << traj.failure->message;
    out.push_back({"step_solver", "fail", traj.failure->residual, loc.str(), {}});
  }

  {
    double worst = 0.0;
    std::string where = at_frame(first);
    for (const auto& f : traj.frames) {
      const double e = std::abs(f.rho.mass() - 1.0);
      if (e > worst) {
        worst = e;
        where = at_frame(f);
      }
    }
    out.push_back(entry("mass_conservation", worst <= opts.mass_tol, worst, where,
                        {{"mass_tol", opts.mass_tol}}));
  }

  if (traj.ledger.size() > 1) {
    double worst = -kInf, dissipated = 0.0, min_energy = traj.ledger.front().energy;
    std::size_t worst_k = 0;
    for (std::size_t k = 1; k < traj.ledger.size(); ++k) {
      const auto& e = traj.ledger[k];
      if (-e.dissipation_slack > worst) {
        worst = -e.dissipation_slack;
        worst_k = e.k;
      }
      dissipated += e.w2_step * e.w2_step / (2.0 * traj.tau);
      min_energy = std::min(min_energy, e.energy);
    }
    out.push_back(entry("energy_dissipation_step", worst <= opts.energy_step_tol, worst,
                        "k=" + std::to_string(worst_k), {{"tolerance", opts.energy_step_tol}}));
    const double excess = dissipated - (traj.ledger.front().energy - min_energy);
    out.push_back(entry("energy_dissipation_total", excess <= opts.energy_total_tol, excess,
                        "k=" + std::to_string(traj.ledger.back().k),
                        {{"tolerance", opts.energy_total_tol}}));

    double res = 0.0;
    std::size_t res_k = 0;
    for (const auto& e : traj.ledger)
      if (e.optimality_residual > res) {
        res = e.optimality_residual;
        res_k = e.k;
      }
    out.push_back(entry("optimality_residual", res <= opts.tol_fix, res,
                        "k=" + std::to_string(res_k), {{"tol_fix", opts.tol_fix}}));
  }

  if (has_pressure) {
    double outside = 0.0, pin = 0.0;
    std::string where_out = at_frame(first), where_pin = at_frame(first);
    for (const auto& f : traj.frames) {
      for (std::size_t i = 0; i < f.rho.n(); ++i) {
        const double p = f.pressure[i];
        const double o = std::max({lo - p, p - hi, 0.0});
        if (o > outside) {
          outside = o;
          where_out = at_frame(f, f.rho.center(i));
        }
        double miss = 0.0;
        if (f.rho[i] < 1.0 - opts.tol_phase) miss = std::abs(p - lo);
        if (f.rho[i] > 1.0 + opts.tol_phase) miss = std::abs(p - hi);
        if (miss > pin) {
          pin = miss;
          where_pin = at_frame(f, f.rho.center(i));
        }
      }
    }
    out.push_back(entry("pressure_range", outside == 0.0, outside, where_out,
                        {{"s_prime_1_minus", lo}, {"s_prime_1_plus", hi}}));
    out.push_back(entry("pressure_pinning", pin <= opts.tol_fix, pin, where_pin,
                        {{"tol_phase", opts.tol_phase}, {"tol_fix", opts.tol_fix}}));
  }

  if (spec.positivity_expected()) {
    double min_value = kInf;
    std::string where = "none";
    for (const auto& f : traj.frames) {
      if (f.k == 0) continue;
      for (std::size_t i = 0; i < f.rho.n(); ++i)
        if (f.rho[i] < min_value) {
          min_value = f.rho[i];
          where = at_frame(f, f.rho.center(i));
        }
    }
    out.push_back(entry("positivity", min_value > 0.0, min_value, where, {}));
  } else {
    out.push_back({"positivity", "not_applicable", kNaN, "S'(0+) is finite", {}});
  }

  if (linf_bound_armed(phi, first.rho.l())) {
    const double m0 = first.rho.max();
    double worst = -kInf;
    std::string where = at_frame(first);
    for (const auto& f : traj.frames) {
      const double excess = f.rho.max() - m0;
      if (excess > worst) {
        worst = excess;
        where = at_frame(f);
      }
    }
    out.push_back(entry("linf_propagation", worst <= opts.linf_tol, worst, where,
                        {{"tolerance", opts.linf_tol}}));
  } else {
    out.push_back({"linf_propagation", "not_applicable", kNaN,
                   "potential is not constant and the boundary flag does not hold", {}});
  }

  if (traj.ledger.size() > 1 && traj.frames.size() > 1) {
    double min_energy = traj.ledger.front().energy;
    for (const auto& e : traj.ledger) min_energy = std::min(min_energy, e.energy);
    const double bound = 2.0 * std::sqrt(2.0 * std::max(traj.ledger.front().energy - min_energy, 0.0));
    double worst = 0.0;
    std::string where = "none";
    for (std::size_t a = 0; a < traj.frames.size(); ++a)
      for (std::size_t b = a + 1; b < traj.frames.size(); ++b) {
        const auto& fa = traj.frames[a];
        const auto& fb = traj.frames[b];
        const double ratio = wasserstein2(fb.rho, fa.rho) / std::sqrt(fb.t - fa.t + traj.tau);
        if (ratio > worst) {
          worst = ratio;
          where = "k=" + std::to_string(fa.k) + ".." + std::to_string(fb.k);
        }
      }
    out.push_back(entry("holder_estimate", worst <= bound + 1e-12, worst, where, {{"bound", bound}},
                        "flag"));
  }

  {
    const auto em = emergence_check(traj, opts.tol_phase);
    std::string where = em.frame ? "k=" + std::to_string(*em.frame) : std::string("none");
    if (em.frame) where += em.both_phases ? " (both side phases present)" : " (plateau is the whole domain)";
    out.push_back({"critical_region_emergence", em.time ? "pass" : "flag",
                   em.time ? *em.time : kNaN, where, {{"tol_phase", opts.tol_phase}}});
  }

  {
    const auto s = summability(traj, spec);
    const double worst = *std::max_element(s.sup_norms.begin(), s.sup_norms.end());
    out.push_back(entry("summability", s.all_finite, worst, "max sup-norm over frames",
                        {{"beta_nominal", s.beta_nominal}}));
  }

  const auto& c = phi.coefficients();
  const bool slope_two = (phi.kind() == Potential::Kind::Linear ||
                          phi.kind() == Potential::Kind::Quadratic) &&
                         c[1] == 2.0 && c[2] == 0.0;
  const bool log_linear = spec.family() == Family::LogLog && slope_two;
  if (log_linear) {
    const auto profile = stationary_log_linear(last.rho.l());
    const double d = lp_distance(last.rho, profile.cell_averages(last.rho.n()), 1.0);
    out.push_back(entry("stationary_l1", d <= opts.stationary_l1_tol, d, at_frame(last),
                        {{"tolerance", opts.stationary_l1_tol}, {"A", profile.breakpoint()}}));
  }

  if (has_pressure) {
    const auto harm = plateau_harmonicity(last.rho, last.pressure, phi, opts.tol_phase);
    if (harm) {
      out.push_back(entry("plateau_harmonicity", harm->worst <= opts.harmonicity_tol, harm->worst,
                          at_frame(last, harm->at), {{"tolerance", opts.harmonicity_tol}}, "flag"));
    } else {
      out.push_back({"plateau_harmonicity", "not_applicable", kNaN,
                     "plateau interior has fewer than three cells", {}});
    }
    const auto jumps = flux_jump_check(last.rho, last.pressure, spec, opts.tol_phase);
    if (jumps.empty()) {
      out.push_back({"flux_jump", "not_applicable", kNaN, "no plateau boundary", {}});
    } else {
      const auto worst = std::max_element(jumps.begin(), jumps.end(), [](auto& x, auto& y) {
        return std::abs(x.mismatch) < std::abs(y.mismatch);
      });
      out.push_back(entry("flux_jump", std::abs(worst->mismatch) <= opts.flux_jump_tol,
                          std::abs(worst->mismatch), at_frame(last, worst->position),
                          {{"tolerance", opts.flux_jump_tol}}, "flag"));
    }
  }
  return out;
}

}  // namespace jkoflow

#include "jkoflow/jko.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jkoflow/error.hpp"

namespace jkoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quantile of the previous density with its derivative, continued linearly
// outside [0, 1] so that Newton iterates with slightly non-monotone CDFs
// remain well defined.
class QuantileEval {
 public:
  explicit QuantileEval(const GridDensity& rho) : rho_(rho) {
    std::size_t first = 0;
    while (rho[first] <= 0.0) ++first;
    std::size_t last = rho.n() - 1;
    while (rho[last] <= 0.0) --last;
    q0_ = rho.face(first);
    slope0_ = 1.0 / rho[first];
    q1_ = rho.face(last + 1);
    slope1_ = 1.0 / rho[last];
  }

  void eval(double s, double& q, double& dq) const {
    if (s <= 0.0) {
      q = q0_ + s * slope0_;
      dq = slope0_;
      return;
    }
    if (s >= 1.0) {
      q = q1_ + (s - 1.0) * slope1_;
      dq = slope1_;
      return;
    }
    const auto& F = rho_.cdf();
    const auto k = static_cast<std::size_t>(std::lower_bound(F.begin(), F.end(), s) - F.begin());
    const std::size_t j = k - 1;
    const double width = F[j + 1] - F[j];
    q = rho_.face(j) + rho_.h() * (s - F[j]) / width;
    dq = rho_.h() / width;
  }

 private:
  const GridDensity& rho_;
  double q0_, slope0_, q1_, slope1_;
};

std::vector<double> trapezoid_potential(const std::vector<double>& d, double h) {
  std::vector<double> phi(d.size(), 0.0);
  for (std::size_t i = 1; i < d.size(); ++i) phi[i] = phi[i - 1] + 0.5 * h * (d[i - 1] + d[i]);
  return phi;
}

double objective(const EntropySpec& spec, const Potential& phi, const GridDensity& rho,
                 const GridDensity& prev, double tau) {
  return energy(spec, phi, rho) + wasserstein2_squared(rho, prev) / (2.0 * tau);
}

struct StepContext {
  const EntropySpec& spec;
  const Potential& phi;
  const GridDensity& prev;
  double tau;
  const SolverOptions& opts;
  std::vector<double> phi_samples;
};

// Runs the exact chain kantorovich -> g -> C -> s'^-1 on a candidate density
// and measures the optimality residual of the resulting density.
JkoStepResult finalize(const StepContext& ctx, const std::vector<double>& candidate,
                       int iterations, const std::string& method) {
  const GridDensity& prev = ctx.prev;
  const std::size_t n = prev.n();
  const double h = prev.h();
  std::vector<double> clipped(candidate);
  for (double& v : clipped) v = std::max(v, 0.0);
  const GridDensity cand = GridDensity::normalized(prev.l(), clipped);

  auto g_of = [&](const GridDensity& rho, std::vector<double>* disp) {
    const auto d = displacement(rho, prev);
    const auto potential = trapezoid_potential(d, h);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = potential[i] / ctx.tau + ctx.phi_samples[i];
    if (disp) *disp = d;
    return std::make_pair(g, potential);
  };

  const auto [g, unused] = g_of(cand, nullptr);
  (void)unused;
  const double c = mass_constant(ctx.spec, g, h, ctx.opts.tol_mass);
  std::vector<double> rho_out(n), pressure(n), multiplier(n);
  const double lo = ctx.spec.s_prime_1_minus(), hi = ctx.spec.s_prime_1_plus();
  for (std::size_t i = 0; i < n; ++i) {
    multiplier[i] = c - g[i];
    rho_out[i] = ctx.spec.generalized_inverse(multiplier[i]);
    pressure[i] = std::clamp(multiplier[i], lo, hi);
  }
  GridDensity out(prev.l(), std::move(rho_out));

  std::vector<double> d_out;
  const auto [g_out, potential_out] = g_of(out, &d_out);
  double c_out = c;
  try {
    c_out = mass_constant(ctx.spec, g_out, h, ctx.opts.tol_mass);
  } catch (const Error&) {
  }
  const double residual = std::min(optimality_residual(ctx.spec, out, g_out, c_out),
                                   optimality_residual(ctx.spec, out, g_out, c));

  std::vector<double> velocity(n);
  for (std::size_t i = 0; i < n; ++i) velocity[i] = d_out[i] / ctx.tau;
  const double w2 = wasserstein2(out, prev);
  const double mass_residual = std::abs(out.mass() - 1.0);
  return JkoStepResult{std::move(out), std::move(pressure), potential_out, std::move(velocity),
                       c,  w2, iterations, residual, mass_residual, method,
                       std::move(multiplier)};
}

// Semismooth Newton on the discrete optimality system. Unknowns interleave the
// multiplier v_i = C - g_i and the CDF at interior faces:
//   z[2i] = v_i, z[2i-1] = F_i.
// Rows: A_i = s'^-1(v_i) - (F_{i+1} - F_i)/h,
//       B_i = v_{i+1} - v_i + h/(2 tau) (d_i + d_{i+1}) + Phi_{i+1} - Phi_i,
// with d_i = x_i - Q_prev((F_i + F_{i+1})/2). The Jacobian is pentadiagonal.
class NewtonSolver {
 public:
  NewtonSolver(const StepContext& ctx, double tau)
      : ctx_(ctx), q_(ctx.prev), n_(ctx.prev.n()), h_(ctx.prev.h()), tau_(tau) {}

  std::size_t size() const { return 2 * n_ - 1; }

  double face(const std::vector<double>& z, std::size_t i) const {
    if (i == 0) return 0.0;
    if (i == n_) return 1.0;
    return z[2 * i - 1];
  }

  void residual(const std::vector<double>& z, std::vector<double>& r, std::vector<double>* dq) const {
    r.assign(size(), 0.0);
    std::vector<double> d(n_), slope(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double q = 0.0;
      q_.eval(0.5 * (face(z, i) + face(z, i + 1)), q, slope[i]);
      d[i] = ctx_.prev.center(i) - q;
    }
    const double c = h_ / (2.0 * tau_);
    for (std::size_t i = 0; i < n_; ++i) {
      r[2 * i] = ctx_.spec.generalized_inverse(z[2 * i]) - (face(z, i + 1) - face(z, i)) / h_;
      if (i + 1 < n_)
        r[2 * i + 1] = z[2 * i + 2] - z[2 * i] + c * (d[i] + d[i + 1]) +
                       ctx_.phi_samples[i + 1] - ctx_.phi_samples[i];
    }
    if (dq) *dq = std::move(slope);
  }

  // Solves J dz = -r in place; returns false when the factorisation fails.
  bool newton_direction(const std::vector<double>& z, const std::vector<double>& dq,
                        std::vector<double>& rhs) const {
    const lapack_int N = static_cast<lapack_int>(size());
    const lapack_int kl = 2, ku = 2, ldab = 2 * kl + ku + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * static_cast<std::size_t>(N), 0.0);
    auto set = [&](std::size_t row, std::size_t col, double v) {
      const std::size_t band = static_cast<std::size_t>(kl + ku) + row - col;
      ab[band + col * static_cast<std::size_t>(ldab)] += v;
    };
    const double c = h_ / (2.0 * tau_);
    for (std::size_t i = 0; i < n_; ++i) {
      // Floor keeps the system regular when a plateau absorbs the whole mass.
      set(2 * i, 2 * i, std::max(ctx_.spec.generalized_inverse_derivative(z[2 * i]), 1e-10));
      if (i >= 1) set(2 * i, 2 * i - 1, 1.0 / h_);
      if (i + 1 < n_) set(2 * i, 2 * i + 1, -1.0 / h_);
      if (i + 1 < n_) {
        const std::size_t row = 2 * i + 1;
        set(row, 2 * i, -1.0);
        set(row, 2 * i + 2, 1.0);
        if (i >= 1) set(row, 2 * i - 1, -0.5 * c * dq[i]);
        set(row, 2 * i + 1, -0.5 * c * (dq[i] + dq[i + 1]));
        if (i + 2 < n_) set(row, 2 * i + 3, -0.5 * c * dq[i + 1]);
      }
    }
    for (double& v : rhs) v = -v;
    std::vector<lapack_int> ipiv(static_cast<std::size_t>(N));
    const lapack_int info =
        LAPACKE_dgbsv(LAPACK_COL_MAJOR, N, kl, ku, 1, ab.data(), ldab, ipiv.data(), rhs.data(), N);
    if (info != 0) return false;
    return std::all_of(rhs.begin(), rhs.end(), [](double v) { return std::isfinite(v); });
  }

  static double merit(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return 0.5 * s;
  }

  static double sup(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s = std::max(s, std::abs(v));
    return s;
  }

  // Returns true on convergence; z is updated in place.
  bool solve(std::vector<double>& z, int& iterations) const {
    std::vector<double> r, dq, step, trial, r_trial;
    residual(z, r, &dq);
    double m = merit(r);
    for (int it = 0; it < kMaxIterations; ++it) {
      if (!std::isfinite(m)) return false;
      if (sup(r) <= kTol) return true;
      step = r;
      if (!newton_direction(z, dq, step)) return false;
      ++iterations;
      double t = 1.0;
      bool accepted = false;
      while (t >= 1e-10) {
        trial = z;
        for (std::size_t k = 0; k < z.size(); ++k) trial[k] += t * step[k];
        residual(trial, r_trial, nullptr);
        const double m_trial = merit(r_trial);
        if (std::isfinite(m_trial) && m_trial <= (1.0 - 2e-4 * t) * m) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) return sup(r) <= kStallTol;
      z.swap(trial);
      residual(z, r, &dq);
      m = merit(r);
    }
    return sup(r) <= kStallTol;
  }

  std::vector<double> density(const std::vector<double>& z) const {
    std::vector<double> rho(n_);
    for (std::size_t i = 0; i < n_; ++i) rho[i] = (face(z, i + 1) - face(z, i)) / h_;
    return rho;
  }

 private:
  static constexpr int kMaxIterations = 200;
  static constexpr double kTol = 1e-11;
  static constexpr double kStallTol = 1e-8;

  const StepContext& ctx_;
  QuantileEval q_;
  std::size_t n_;
  double h_;
  double tau_;
};

std::vector<double> initial_guess(const StepContext& ctx, const std::vector<double>* warm) {
  const GridDensity& prev = ctx.prev;
  const std::size_t n = prev.n();
  std::vector<double> z(2 * n - 1);
  for (std::size_t i = 1; i < n; ++i) z[2 * i - 1] = prev.cdf()[i];
  if (warm && warm->size() == n) {
    for (std::size_t i = 0; i < n; ++i) z[2 * i] = (*warm)[i];
    return z;
  }
  const auto& spec = ctx.spec;
  double floor_rho = kInf;
  for (double v : prev.values())
    if (v > 0.0) floor_rho = std::min(floor_rho, v);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = prev[i];
    double v;
    if (rho == 1.0) {
      v = 0.5 * (spec.s_prime_1_minus() + spec.s_prime_1_plus());
    } else if (rho > 0.0) {
      v = spec.derivative(rho);
    } else if (std::isfinite(spec.s_prime_0())) {
      v = spec.s_prime_0();
    } else {
      v = spec.derivative(1e-12 * floor_rho);
    }
    z[2 * i] = v;
  }
  return z;
}

bool newton_with_continuation(const StepContext& ctx, double tau, std::vector<double>& z,
                              int depth, int& iterations, bool& continued) {
  NewtonSolver solver(ctx, tau);
  std::vector<double> attempt = z;
  if (solver.solve(attempt, iterations)) {
    z.swap(attempt);
    return true;
  }
  if (depth >= 8) return false;
  continued = true;
  std::vector<double> half = z;
  if (!newton_with_continuation(ctx, 0.5 * tau, half, depth + 1, iterations, continued))
    return false;
  attempt = half;
  if (solver.solve(attempt, iterations)) {
    z.swap(attempt);
    return true;
  }
  return false;
}

JkoStepResult picard(const StepContext& ctx, int& iterations) {
  const GridDensity& prev = ctx.prev;
  const std::size_t n = prev.n();
  const double h = prev.h();
  GridDensity rho = prev;
  std::optional<JkoStepResult> best;
  for (int it = 0; it < ctx.opts.max_iters; ++it) {
    ++iterations;
    const auto potential = trapezoid_potential(displacement(rho, prev), h);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = potential[i] / ctx.tau + ctx.phi_samples[i];
    const double c = mass_constant(ctx.spec, g, h, ctx.opts.tol_mass);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = ctx.spec.generalized_inverse(c - g[i]);
    const GridDensity rho_hat = GridDensity::normalized(prev.l(), target);
    const double change = lp_distance(rho_hat, rho, 1.0);
    if (change <= ctx.opts.tol_fix) {
      auto res = finalize(ctx, rho_hat.values(), iterations, "picard");
      if (res.optimality_residual <= ctx.opts.tol_fix) return res;
      if (!best || res.optimality_residual < best->optimality_residual) best = std::move(res);
    }
    const double j0 = objective(ctx.spec, ctx.phi, rho, prev, ctx.tau);
    double omega = ctx.opts.damping;
    while (true) {
      std::vector<double> mixed(n);
      for (std::size_t i = 0; i < n; ++i) mixed[i] = (1.0 - omega) * rho[i] + omega * rho_hat[i];
      GridDensity trial = GridDensity::normalized(prev.l(), mixed);
      if (omega <= 1.0 / 64.0 || objective(ctx.spec, ctx.phi, trial, prev, ctx.tau) <= j0) {
        rho = std::move(trial);
        break;
      }
      omega = std::max(0.5 * omega, 1.0 / 64.0);
    }
  }
  if (!best) {
    try {
      best = finalize(ctx, rho.values(), iterations, "picard");
    } catch (const Error&) {
    }
  }
  std::ostringstream msg;
  msg << "JKO step did not converge after " << ctx.opts.max_iters << " iterations";
  if (best) msg << " (best optimality residual " << best->optimality_residual << ")";
  throw StepFailure(msg.str(), std::move(best));
}

}  // namespace

double energy(const EntropySpec& spec, const Potential& phi, const GridDensity& rho) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rho.n(); ++i)
    sum += spec.value(rho[i]) + phi.value(rho.center(i)) * rho[i];
  return rho.h() * sum;
}

double mass_for_constant(const EntropySpec& spec, const std::vector<double>& g, double h,
                         double c) {
  double sum = 0.0;
  for (double gi : g) sum += spec.generalized_inverse(c - gi);
  return h * sum;
}

double mass_constant(const EntropySpec& spec, const std::vector<double>& g, double h,
                     double tol_mass) {
  require(!g.empty(), ErrorCode::kInvalidArgument, "mass_constant needs at least one cell");
  for (double v : g)
    require(std::isfinite(v), ErrorCode::kInvalidArgument, "mass_constant: g is not finite");
  const auto [gmin, gmax] = std::minmax_element(g.begin(), g.end());
  double lo = *gmin + spec.s_prime_1_minus() - 1.0;
  double hi = *gmax + spec.s_prime_1_plus() + 1.0;
  double width = hi - lo;
  double m_lo = mass_for_constant(spec, g, h, lo);
  double m_hi = mass_for_constant(spec, g, h, hi);
  int grow = 0;
  while (m_lo > 1.0 || m_hi < 1.0) {
    if (++grow > 1000 || !std::isfinite(width)) {
      std::ostringstream msg;
      msg << "mass constant not bracketed: achievable mass range [" << m_lo << ", " << m_hi
          << "]";
      throw Error(ErrorCode::kNoSolution, msg.str());
    }
    if (m_lo > 1.0) {
      lo -= width;
      m_lo = mass_for_constant(spec, g, h, lo);
    }
    if (m_hi < 1.0) {
      hi += width;
      m_hi = mass_for_constant(spec, g, h, hi);
    }
    width *= 2.0;
  }
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double m = mass_for_constant(spec, g, h, mid);
    if (m == 1.0) return mid;
    if (m < 1.0) {
      lo = mid;
      m_lo = m;
    } else {
      hi = mid;
      m_hi = m;
    }
  }
  const double best = std::abs(m_lo - 1.0) <= std::abs(m_hi - 1.0) ? lo : hi;
  const double miss = std::min(std::abs(m_lo - 1.0), std::abs(m_hi - 1.0));
  if (miss > tol_mass) {
    std::ostringstream msg;
    msg << "mass constant misses unit mass by " << miss;
    throw Error(ErrorCode::kNoSolution, msg.str());
  }
  return best;
}

double optimality_residual(const EntropySpec& spec, const GridDensity& rho,
                           const std::vector<double>& g, double c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < rho.n(); ++i) {
    const double v = c - g[i];
    if (rho[i] == 0.0 && spec.generalized_inverse(v) == 0.0) continue;
    const double dist = spec.subdifferential(rho[i]).distance(v);
    worst = std::max(worst, dist);
  }
  return worst;
}

JkoStepResult jko_step(const EntropySpec& spec, const Potential& phi, const GridDensity& rho_prev,
                       double tau, const SolverOptions& opts, const std::vector<double>* warm_start) {
  require(tau > 0.0 && std::isfinite(tau), ErrorCode::kInvalidArgument, "tau must be positive");
  StepContext ctx{spec, phi, rho_prev, tau, opts, phi.sample_centers(rho_prev.l(), rho_prev.n())};
  int iterations = 0;
  std::optional<JkoStepResult> best;

  if (opts.method == SolverOptions::Method::Newton) {
    std::vector<double> z = initial_guess(ctx, warm_start);
    bool continued = false;
    const bool ok = newton_with_continuation(ctx, tau, z, 0, iterations, continued);
    try {
      NewtonSolver solver(ctx, tau);
      auto res = finalize(ctx, solver.density(z), iterations,
                          continued ? "newton+continuation" : "newton");
      if (ok && res.optimality_residual <= opts.tol_fix) return res;
      best = std::move(res);
    } catch (const Error&) {
      // Unusable candidate; fall through to the fixed-point iteration.
    }
  }
  try {
    return picard(ctx, iterations);
  } catch (StepFailure& failure) {
    if (best && (!failure.best() ||
                 best->optimality_residual < failure.best()->optimality_residual))
      throw StepFailure(failure.what(), std::move(best));
    throw;
  }
}

std::vector<double> default_pressure(const EntropySpec& spec, const GridDensity& rho) {
  std::vector<double> p(rho.n());
  for (std::size_t i = 0; i < rho.n(); ++i)
    p[i] = rho[i] > 1.0 ? spec.s_prime_1_plus() : spec.s_prime_1_minus();
  return p;
}

std::size_t step_count(double tau, double horizon) {
  require(tau > 0.0 && std::isfinite(tau), ErrorCode::kInvalidArgument, "tau must be positive");
  require(horizon >= 0.0 && std::isfinite(horizon), ErrorCode::kInvalidArgument,
          "horizon must be nonnegative");
  const double ratio = horizon / tau;
  const double steps = std::round(ratio);
  require(std::abs(ratio - steps) <= 1e-9 * std::max(1.0, ratio), ErrorCode::kInvalidArgument,
          "horizon is not an integer multiple of tau");
  return static_cast<std::size_t>(steps);
}

Trajectory run_trajectory(const EntropySpec& spec, const Potential& phi, const GridDensity& rho0,
                          double tau, double horizon, const SolverOptions& opts,
                          std::size_t frames_every) {
  const std::size_t steps = step_count(tau, horizon);
  require(frames_every >= 1, ErrorCode::kInvalidArgument, "frames_every must be >= 1");
  Trajectory traj;
  traj.tau = tau;
  double e_prev = energy(spec, phi, rho0);
  traj.frames.push_back(Frame{0, 0.0, rho0, default_pressure(spec, rho0)});
  traj.ledger.push_back(LedgerEntry{0, 0.0, e_prev, 0.0, 0.0, 0, 0.0});

  GridDensity current = rho0;
  std::vector<double> warm;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * tau;
    try {
      JkoStepResult res = jko_step(spec, phi, current, tau, opts, warm.empty() ? nullptr : &warm);
      const double e = energy(spec, phi, res.rho_new);
      const double slack = e_prev - e - res.w2_step * res.w2_step / (2.0 * tau);
      traj.ledger.push_back(
          LedgerEntry{k, t, e, res.w2_step, slack, res.iterations, res.optimality_residual});
      if (k % frames_every == 0 || k == steps)
        traj.frames.push_back(Frame{k, t, res.rho_new, res.pressure});
      current = res.rho_new;
      warm = std::move(res.multiplier);
      e_prev = e;
    } catch (const StepFailure& failure) {
      const double residual = failure.best() ? failure.best()->optimality_residual : kInf;
      traj.failure = TrajectoryFailure{k, failure.what(), residual};
      break;
    } catch (const Error& err) {
      traj.failure = TrajectoryFailure{k, err.what(), kInf};
      break;
    }
  }
  return traj;
}

}  // namespace jkoflow

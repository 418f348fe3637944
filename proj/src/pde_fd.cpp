#include "jkoflow/pde_fd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jkoflow/error.hpp"

namespace jkoflow {

RegularizedFlux::RegularizedFlux(const EntropySpec& spec, double epsilon)
    : spec_(&spec), eps_(epsilon) {
  require(epsilon > 0.0 && epsilon < 0.5, ErrorCode::kInvalidArgument,
          "regularisation width must lie in (0, 0.5)");
  a_ = 1.0 - eps_;
  b_ = 1.0 + eps_;
  fa_ = spec.flux(a_);
  fb_ = spec.flux(b_);
  da_ = spec.flux_derivative(a_);
  db_ = spec.flux_derivative(b_);
  // Fritsch-Carlson sufficient condition for a monotone cubic Hermite.
  const double secant = (fb_ - fa_) / (b_ - a_);
  require(secant > 0.0, ErrorCode::kInvalidArgument, "flux is not increasing across the window");
  const double alpha = da_ / secant, beta = db_ / secant;
  require(alpha >= 0.0 && beta >= 0.0 && alpha * alpha + beta * beta <= 9.0,
          ErrorCode::kInvalidArgument,
          "regularisation width too large for a monotone interpolant");
  // The log-log flux is rho below the window and 2 rho above it.
  linear_ = spec.family() == Family::LogLog;
  // Monomial coefficients in (rho - a) of the same Hermite cubic.
  const double w = b_ - a_;
  c_[0] = fa_;
  c_[1] = da_;
  c_[2] = (3.0 * secant - 2.0 * da_ - db_) / w;
  c_[3] = (da_ + db_ - 2.0 * secant) / (w * w);
}

double RegularizedFlux::value(double rho) const {
  if (linear_) {
    if (rho <= a_) return rho;
    if (rho >= b_) return 2.0 * rho;
  } else if (rho <= a_ || rho >= b_) {
    return spec_->flux(rho);
  }
  const double s = rho - a_;
  return c_[0] + s * (c_[1] + s * (c_[2] + s * c_[3]));
}

double RegularizedFlux::derivative(double rho) const {
  if (rho <= a_ || rho >= b_) return spec_->flux_derivative(rho);
  const double w = b_ - a_;
  const double t = (rho - a_) / w;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * fa_ + (-6 * t2 + 6 * t) * fb_) / w + (3 * t2 - 4 * t + 1) * da_ +
         (3 * t2 - 2 * t) * db_;
}

double RegularizedFlux::max_derivative(double rho_max) const {
  double worst = derivative(0.0);
  const int samples = 4000;
  for (int k = 0; k <= samples; ++k) worst = std::max(worst, derivative(rho_max * k / samples));
  if (rho_max > a_) {
    const double hi = std::min(rho_max, b_);
    for (int k = 0; k <= samples; ++k) worst = std::max(worst, derivative(a_ + (hi - a_) * k / samples));
  }
  // Quadratic in t inside the window: include the vertex.
  const double w = b_ - a_;
  const double c2 = (6 * fa_ - 6 * fb_) / w + 3 * da_ + 3 * db_;
  const double c1 = (-6 * fa_ + 6 * fb_) / w - 4 * da_ - 2 * db_;
  if (c2 != 0.0) {
    const double t = -c1 / (2 * c2);
    const double r = a_ + t * w;
    if (t > 0.0 && t < 1.0 && r <= rho_max) worst = std::max(worst, derivative(r));
  }
  return worst;
}

double fd_stable_dt(double h, double max_flux_derivative, double max_drift) {
  return 0.45 / (max_flux_derivative / (h * h) + max_drift / h);
}

FdResult fd_run(const EntropySpec& spec, const Potential& phi, const GridDensity& rho0,
                double horizon, const FdOptions& opts) {
  require(horizon >= 0.0 && std::isfinite(horizon), ErrorCode::kInvalidArgument,
          "horizon must be nonnegative");
  const RegularizedFlux flux(spec, opts.epsilon);
  const std::size_t n = rho0.n();
  const double h = rho0.h();
  const double l = rho0.l();

  const auto samples = phi.sample_centers(l, n);
  std::vector<double> drift(n + 1, 0.0);  // velocity -Phi' at faces; ends stay closed
  double max_drift = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    drift[i] = -(samples[i] - samples[i - 1]) / h;
    max_drift = std::max(max_drift, std::abs(drift[i]));
  }

  double rho_range = 2.0 * std::max(rho0.max(), 1.0 + opts.epsilon);
  double a_max = flux.max_derivative(rho_range);
  const double dt_bound = fd_stable_dt(h, a_max, max_drift);
  double dt = opts.dt > 0.0 ? opts.dt : dt_bound;
  require(dt <= dt_bound * (1.0 + 1e-12), ErrorCode::kCflViolation,
          "requested dt exceeds the stability bound");

  const double frame_interval = opts.frame_interval > 0.0 ? opts.frame_interval : horizon;
  std::size_t frame_count = 0;
  std::size_t steps_per_frame = 0;
  if (horizon > 0.0) {
    frame_count = static_cast<std::size_t>(std::llround(horizon / frame_interval));
    require(std::abs(frame_count * frame_interval - horizon) <= 1e-9 * std::max(1.0, horizon),
            ErrorCode::kInvalidArgument, "horizon is not a multiple of the frame interval");
    steps_per_frame = static_cast<std::size_t>(std::ceil(frame_interval / dt - 1e-9));
    dt = frame_interval / static_cast<double>(steps_per_frame);
  }

  FdResult out;
  out.dt = dt;
  const std::vector<double> nan_pressure(n, std::numeric_limits<double>::quiet_NaN());
  out.trajectory.tau = frame_interval;
  out.trajectory.frames.push_back(Frame{0, 0.0, rho0, nan_pressure});

  std::vector<double> rho = rho0.values();
  const double ratio = dt / h;
  const double inv_h = 1.0 / h;
  for (std::size_t f = 1; f <= frame_count; ++f) {
    for (std::size_t s = 0; s < steps_per_frame; ++s) {
      // Fused sweep: face i's flux only needs cells i-1 and i, so each cell
      // is updated once both of its faces are known.
      double f_prev = flux.value(rho[0]);
      double left_flux = 0.0;
      double peak = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double f_here = flux.value(rho[i]);
        const double v = drift[i];
        const double upwind = v > 0.0 ? rho[i - 1] : rho[i];
        const double face = -(f_here - f_prev) * inv_h + v * upwind;
        rho[i - 1] -= ratio * (face - left_flux);
        peak = std::max(peak, rho[i - 1]);
        left_flux = face;
        f_prev = f_here;
      }
      rho[n - 1] += ratio * left_flux;
      peak = std::max(peak, rho[n - 1]);
      ++out.steps;
      if (peak > rho_range) {
        rho_range = 2.0 * peak;
        a_max = flux.max_derivative(rho_range);
        if (dt > fd_stable_dt(h, a_max, max_drift) * (1.0 + 1e-12)) {
          std::ostringstream msg;
          msg << "stability bound violated at t = " << static_cast<double>(out.steps) * dt
              << ": density reached " << peak;
          throw Error(ErrorCode::kCflViolation, msg.str());
        }
      }
    }
    for (double v : rho)
      if (v < 0.0) throw Error(ErrorCode::kCflViolation, "explicit scheme produced negative density");
    double mass = 0.0;
    for (double v : rho) mass += v;
    mass *= h;
    out.max_mass_error = std::max(out.max_mass_error, std::abs(mass - 1.0));
    // Stored as-is; the GridDensity mass check guards against drift.
    out.trajectory.frames.push_back(Frame{f, static_cast<double>(f) * frame_interval,
                                          GridDensity(l, rho), nan_pressure});
  }
  return out;
}

}  // namespace jkoflow

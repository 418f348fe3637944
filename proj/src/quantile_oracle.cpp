#include "jkoflow/quantile_oracle.hpp"

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "jkoflow/error.hpp"

namespace jkoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 4-point Gauss-Legendre on [-1, 1]; exact through degree 7.
constexpr std::array<double, 4> kGaussX{-0.8611363115940526, -0.3399810435848563,
                                        0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussW{0.3478548451374538, 0.6521451548625461,
                                        0.6521451548625461, 0.3478548451374538};

template <class F>
double gauss(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += kGaussW[k] * f(mid + half * kGaussX[k]);
  return half * s;
}

}  // namespace

// ---------------------------------------------------------------------------

SmoothedEntropy::SmoothedEntropy(const EntropySpec& spec, double epsilon)
    : spec_(&spec), eps_(epsilon) {
  require(epsilon > 0.0 && epsilon < 0.5, ErrorCode::kInvalidArgument,
          "smoothing width must lie in (0, 0.5)");
  a_ = 1.0 - eps_;
  b_ = 1.0 + eps_;
  s_a_ = spec.value(a_);
  sp_a_ = spec.derivative(a_);
  spp_a_ = spec.second_derivative(a_);
  sp_b_ = spec.derivative(b_);
  spp_b_ = spec.second_derivative(b_);
  bump_ = 0.0;
  const double blend = gauss([&](double r) { return window_derivative(r); }, a_, b_);
  bump_ = spec.value(b_) - s_a_ - blend;
  for (int k = 0; k <= 200; ++k) {
    const double r = a_ + (b_ - a_) * k / 200.0;
    if (!(window_second(r) > 0.0))
      throw Error(ErrorCode::kOracleFailure, "smoothed entropy is not convex inside the window");
  }
}

double SmoothedEntropy::window_derivative(double rho) const {
  const double t = (rho - a_) / (b_ - a_);
  const double w = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  const double dw = 30.0 * t * t * (1.0 - t) * (1.0 - t) / (b_ - a_);
  const double lower = sp_a_ + spp_a_ * (rho - a_);
  const double upper = sp_b_ + spp_b_ * (rho - b_);
  return (1.0 - w) * lower + w * upper + bump_ * dw;
}

double SmoothedEntropy::window_second(double rho) const {
  const double width = b_ - a_;
  const double t = (rho - a_) / width;
  const double w = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  const double dw = 30.0 * t * t * (1.0 - t) * (1.0 - t) / width;
  const double ddw = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (width * width);
  const double lower = sp_a_ + spp_a_ * (rho - a_);
  const double upper = sp_b_ + spp_b_ * (rho - b_);
  return (1.0 - w) * spp_a_ + w * spp_b_ + dw * (upper - lower) + bump_ * ddw;
}

double SmoothedEntropy::value(double rho) const {
  if (rho <= a_ || rho >= b_) return spec_->value(rho);
  return s_a_ + gauss([&](double r) { return window_derivative(r); }, a_, rho);
}

double SmoothedEntropy::derivative(double rho) const {
  if (rho <= a_ || rho >= b_) return spec_->derivative(rho);
  return window_derivative(rho);
}

double SmoothedEntropy::second_derivative(double rho) const {
  if (rho <= a_ || rho >= b_) return spec_->second_derivative(rho);
  return window_second(rho);
}

// ---------------------------------------------------------------------------

QuantileProblem::QuantileProblem(const EntropySpec& spec, const Potential& phi,
                                 const GridDensity& prev, double tau, double epsilon,
                                 std::size_t n_particles)
    : s_(spec, epsilon), phi_(&phi), l_(prev.l()), tau_(tau), n_(n_particles) {
  require(n_particles >= 32, ErrorCode::kInvalidArgument, "oracle needs at least 32 particles");
  require(tau > 0.0, ErrorCode::kInvalidArgument, "tau must be positive");
  const double N = static_cast<double>(n_);
  y_.resize(n_ + 1);
  for (std::size_t i = 0; i <= n_; ++i) y_[i] = quantile(prev, static_cast<double>(i) / N);

  // Exact integrals of Y psi_i and Y^2: split [0,1] at the hat nodes and at
  // the CDF faces of prev so both factors are linear on every piece.
  std::vector<double> cuts;
  for (std::size_t i = 0; i <= n_; ++i) cuts.push_back(static_cast<double>(i) / N);
  for (double f : prev.cdf()) cuts.push_back(f);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  load_.assign(n_ + 1, 0.0);
  const auto& F = prev.cdf();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b);
    const auto up = static_cast<std::size_t>(std::lower_bound(F.begin(), F.end(), m) - F.begin());
    const std::size_t j = up - 1;
    auto y = [&](double s) { return prev.face(j) + prev.h() * (s - F[j]) / (F[j + 1] - F[j]); };
    const auto hat = std::min(static_cast<std::size_t>(m * N), n_ - 1);
    auto right = [&](double s) { return s * N - static_cast<double>(hat); };
    auto simpson = [&](auto f) { return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b)); };
    load_[hat] += simpson([&](double s) { return y(s) * (1.0 - right(s)); });
    load_[hat + 1] += simpson([&](double s) { return y(s) * right(s); });
    y_square_ += simpson([&](double s) { return y(s) * y(s); });
  }
}

double QuantileProblem::gap_energy(double gap) const {
  const double rho = 1.0 / (static_cast<double>(n_) * gap);
  return gap * s_.value(rho);
}

double QuantileProblem::gap_derivative(double gap) const {
  const double rho = 1.0 / (static_cast<double>(n_) * gap);
  return s_.value(rho) - rho * s_.derivative(rho);
}

double QuantileProblem::gap_second(double gap) const {
  const double rho = 1.0 / (static_cast<double>(n_) * gap);
  return static_cast<double>(n_) * rho * rho * rho * s_.second_derivative(rho);
}

double QuantileProblem::objective(const std::vector<double>& x) const {
  if (x.front() < 0.0 || x.back() > l_) return kInf;
  const double N = static_cast<double>(n_);
  double internal = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double gap = x[i + 1] - x[i];
    if (!(gap > 0.0)) return kInf;
    internal += gap_energy(gap);
  }
  double potential = 0.0, quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i <= n_; ++i) {
    const double w = (i == 0 || i == n_) ? 0.5 : 1.0;
    potential += w * phi_->value(x[i]);
    quad += (w * 2.0 / 3.0) * x[i] * x[i];
    if (i < n_) quad += (2.0 / 6.0) * x[i] * x[i + 1];
    lin += load_[i] * x[i];
  }
  return internal + potential / N + (quad / N - 2.0 * lin + y_square_) / (2.0 * tau_);
}

std::vector<double> QuantileProblem::gradient(const std::vector<double>& x) const {
  const double N = static_cast<double>(n_);
  std::vector<double> g(n_ + 1, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double d = gap_derivative(x[i + 1] - x[i]);
    g[i] -= d;
    g[i + 1] += d;
  }
  for (std::size_t i = 0; i <= n_; ++i) {
    const double w = (i == 0 || i == n_) ? 0.5 : 1.0;
    double mx = (w * 2.0 / 3.0) * x[i];
    if (i > 0) mx += x[i - 1] / 6.0;
    if (i < n_) mx += x[i + 1] / 6.0;
    g[i] += w * phi_->derivative(x[i]) / N + (mx / N - load_[i]) / tau_;
  }
  return g;
}

void QuantileProblem::hessian(const std::vector<double>& x, std::vector<double>& diag,
                              std::vector<double>& off) const {
  const double N = static_cast<double>(n_);
  diag.assign(n_ + 1, 0.0);
  off.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double c = gap_second(x[i + 1] - x[i]);
    diag[i] += c;
    diag[i + 1] += c;
    off[i] = -c + 1.0 / (6.0 * N * tau_);
  }
  for (std::size_t i = 0; i <= n_; ++i) {
    const double w = (i == 0 || i == n_) ? 0.5 : 1.0;
    // Finite-difference curvature of Phi, clipped at 0 to keep the model convex.
    const double eps = 1e-6;
    const double curv = (phi_->derivative(x[i] + eps) - phi_->derivative(x[i] - eps)) / (2 * eps);
    diag[i] += w * std::max(curv, 0.0) / N + (w * 2.0 / 3.0) / (N * tau_);
  }
}

// ---------------------------------------------------------------------------

GridDensity bin_nodes(const std::vector<double>& nodes, double l, std::size_t n) {
  const double h = l / static_cast<double>(n);
  const double per = 1.0 / static_cast<double>(nodes.size() - 1);
  std::vector<double> mass(n, 0.0);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i], b = nodes[i + 1];
    const double value = per / (b - a);
    auto first = static_cast<std::size_t>(std::max(0.0, std::floor(a / h)));
    for (std::size_t j = std::min(first, n - 1); j < n; ++j) {
      const double lo = std::max(a, static_cast<double>(j) * h);
      const double hi = std::min(b, static_cast<double>(j + 1) * h);
      if (lo >= b) break;
      if (hi > lo) mass[j] += value * (hi - lo);
    }
  }
  for (double& m : mass) m /= h;
  return GridDensity::normalized(l, std::move(mass));
}

OracleResult step_oracle_quantile(const EntropySpec& spec, const Potential& phi,
                                  const GridDensity& prev, double tau, double epsilon,
                                  std::size_t n_particles) {
  QuantileProblem problem(spec, phi, prev, tau, epsilon, n_particles);
  const std::size_t N = problem.particles();
  const double l = problem.l();
  std::vector<double> x = problem.reference_nodes();
  x.front() = std::max(x.front(), 0.0);
  x.back() = std::min(x.back(), l);
  double f = problem.objective(x);
  require(std::isfinite(f), ErrorCode::kOracleFailure, "oracle start point is infeasible");

  int iterations = 0;
  double gnorm = kInf;
  std::vector<double> diag, off, step, trial;
  for (; iterations < 500; ++iterations) {
    const auto g = problem.gradient(x);
    const bool lower_active = x.front() <= 0.0 && g.front() > 0.0;
    const bool upper_active = x.back() >= l && g.back() < 0.0;
    gnorm = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      if ((i == 0 && lower_active) || (i == N && upper_active)) continue;
      gnorm = std::max(gnorm, std::abs(g[i]));
    }
    if (gnorm <= 1e-9) break;

    problem.hessian(x, diag, off);
    step.assign(N + 1, 0.0);
    for (std::size_t i = 0; i <= N; ++i) step[i] = -g[i];
    if (lower_active) {
      diag[0] = 1.0;
      off[0] = 0.0;
      step[0] = 0.0;
    }
    if (upper_active) {
      diag[N] = 1.0;
      off[N - 1] = 0.0;
      step[N] = 0.0;
    }
    const lapack_int info = LAPACKE_dptsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(N + 1), 1, diag.data(), off.data(),
                                          step.data(), static_cast<lapack_int>(N + 1));
    if (info != 0) {
      for (std::size_t i = 0; i <= N; ++i) step[i] = -g[i];
      if (lower_active) step[0] = 0.0;
      if (upper_active) step[N] = 0.0;
    }

    double t_max = 1.0;
    if (step.front() < 0.0) t_max = std::min(t_max, -x.front() / step.front());
    if (step.back() > 0.0) t_max = std::min(t_max, (l - x.back()) / step.back());
    double slope = 0.0;
    for (std::size_t i = 0; i <= N; ++i) slope += g[i] * step[i];

    double t = t_max;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = x;
      for (std::size_t i = 0; i <= N; ++i) trial[i] += t * step[i];
      if (t == t_max) {
        if (step.front() < 0.0 && -x.front() / step.front() <= t) trial.front() = 0.0;
        if (step.back() > 0.0 && (l - x.back()) / step.back() <= t) trial.back() = l;
      }
      trial.front() = std::max(trial.front(), 0.0);
      trial.back() = std::min(trial.back(), l);
      const double f_trial = problem.objective(trial);
      bool ok = std::isfinite(f_trial) && f_trial <= f + 1e-4 * t * slope;
      // Near the optimum the objective decrease drops below rounding; there a
      // step that is flat in the objective but shrinks the gradient is taken.
      if (!ok && std::isfinite(f_trial) && f_trial <= f + 1e-12 * (1.0 + std::abs(f))) {
        const auto g_trial = problem.gradient(trial);
        double trial_norm = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
          if ((i == 0 && trial.front() <= 0.0 && g_trial.front() > 0.0) ||
              (i == N && trial.back() >= l && g_trial.back() < 0.0))
            continue;
          trial_norm = std::max(trial_norm, std::abs(g_trial[i]));
        }
        ok = trial_norm < 0.5 * gnorm;
      }
      if (ok) {
        accepted = true;
        x.swap(trial);
        f = f_trial;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }

  for (std::size_t i = 0; i < N; ++i)
    if (!(x[i + 1] > x[i]))
      throw Error(ErrorCode::kOracleFailure, "oracle particles crossed");
  if (gnorm > 1e-6) {
    std::ostringstream msg;
    msg << "oracle did not converge (gradient norm " << gnorm << ")";
    throw Error(ErrorCode::kOracleFailure, msg.str());
  }
  return OracleResult{bin_nodes(x, l, prev.n()), x, iterations, gnorm, f};
}

}  // namespace jkoflow

#include "jkoflow/density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <limits>
#include <sstream>

#include "jkoflow/error.hpp"

namespace jkoflow {

namespace {

constexpr double kMassTol = 1e-10;

void check_values(double l, const std::vector<double>& values) {
  require(std::isfinite(l) && l > 0.0, ErrorCode::kInvalidArgument,
          "domain length must be positive");
  require(!values.empty(), ErrorCode::kInvalidArgument, "density needs at least one cell");
  for (std::size_t i = 0; i < values.size(); ++i)
    require(std::isfinite(values[i]) && values[i] >= 0.0, ErrorCode::kInvalidArgument,
            "density value at cell " + std::to_string(i) + " is negative or not finite");
}

double raw_mass(double l, const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * l / static_cast<double>(values.size());
}

void require_same_domain(const GridDensity& a, const GridDensity& b) {
  require(std::abs(a.l() - b.l()) <= 1e-12 * std::max(a.l(), b.l()), ErrorCode::kInvalidArgument,
          "densities live on different domains");
}

// Linear piece of the quantile on cell j evaluated at s.
double quantile_on_cell(const GridDensity& rho, std::size_t j, double s) {
  const auto& F = rho.cdf();
  return rho.face(j) + rho.h() * (s - F[j]) / (F[j + 1] - F[j]);
}

std::size_t next_massive(const GridDensity& rho, std::size_t j) {
  while (j < rho.n() && rho[j] <= 0.0) ++j;
  return j;
}

}  // namespace

GridDensity::GridDensity(double l, std::vector<double> values) : l_(l), values_(std::move(values)) {
  check_values(l_, values_);
  const double mass = raw_mass(l_, values_);
  require(std::abs(mass - 1.0) <= kMassTol, ErrorCode::kInvalidArgument,
          "density mass " + std::to_string(mass) + " differs from 1");
  cdf_.assign(values_.size() + 1, 0.0);
  double run = 0.0;
  double total = 0.0;
  for (double v : values_) total += v;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    run += values_[i];
    cdf_[i + 1] = run / total;
  }
  cdf_.back() = 1.0;
  sf_.assign(values_.size() + 1, 0.0);
  run = 0.0;
  for (std::size_t i = values_.size(); i-- > 0;) {
    run += values_[i];
    sf_[i] = run / total;
  }
  sf_.front() = 1.0;
}

GridDensity GridDensity::normalized(double l, std::vector<double> values, double* factor) {
  check_values(l, values);
  const double mass = raw_mass(l, values);
  require(mass > 0.0, ErrorCode::kInvalidArgument, "density has zero mass");
  const double scale = 1.0 / mass;
  for (double& v : values) v *= scale;
  if (factor) *factor = scale;
  return GridDensity(l, std::move(values));
}

GridDensity GridDensity::uniform(double l, std::size_t n) {
  return GridDensity(l, std::vector<double>(n, 1.0 / l));
}

double GridDensity::mass() const { return raw_mass(l_, values_); }

double GridDensity::max() const { return *std::max_element(values_.begin(), values_.end()); }

double quantile(const GridDensity& rho, double s) {
  require(s >= 0.0 && s <= 1.0, ErrorCode::kInvalidArgument, "quantile level outside [0,1]");
  const auto& F = rho.cdf();
  if (s <= 0.0) return rho.face(next_massive(rho, 0));
  // First face with F >= s; the cell before it carries mass.
  const auto k = static_cast<std::size_t>(std::lower_bound(F.begin(), F.end(), s) - F.begin());
  const std::size_t j = k - 1;
  return std::min(quantile_on_cell(rho, j, s), rho.face(j + 1));
}

double upper_quantile(const GridDensity& rho, double u) {
  require(u >= 0.0 && u <= 1.0, ErrorCode::kInvalidArgument, "quantile level outside [0,1]");
  if (u >= 0.5 || u <= 0.0) return quantile(rho, 1.0 - u);
  const auto& S = rho.survival();
  // S is non-increasing; last face with S >= u, the cell after it carries mass.
  const auto k = static_cast<std::size_t>(
      std::upper_bound(S.begin(), S.end(), u, std::greater<double>()) - S.begin());
  const std::size_t j = k - 1;
  if (j >= rho.n()) return rho.l();
  return std::max(rho.face(j) + rho.h() * (S[j] - u) / (S[j] - S[j + 1]), rho.face(j));
}

double wasserstein2_squared(const GridDensity& rho, const GridDensity& nu) {
  require_same_domain(rho, nu);
  const auto& Fr = rho.cdf();
  const auto& Fn = nu.cdf();
  std::size_t i = next_massive(rho, 0);
  std::size_t j = next_massive(nu, 0);
  double s = 0.0;
  double total = 0.0;
  while (i < rho.n() && j < nu.n()) {
    const double end = std::min(Fr[i + 1], Fn[j + 1]);
    if (end > s) {
      const double da = quantile_on_cell(rho, i, s) - quantile_on_cell(nu, j, s);
      const double db = quantile_on_cell(rho, i, end) - quantile_on_cell(nu, j, end);
      total += (end - s) * (da * da + da * db + db * db) / 3.0;
      s = end;
    }
    const bool adv_i = Fr[i + 1] <= end;
    const bool adv_j = Fn[j + 1] <= end;
    if (adv_i) i = next_massive(rho, i + 1);
    if (adv_j) j = next_massive(nu, j + 1);
  }
  return total;
}

double wasserstein2(const GridDensity& rho, const GridDensity& nu) {
  return std::sqrt(wasserstein2_squared(rho, nu));
}

std::vector<double> displacement(const GridDensity& rho, const GridDensity& nu) {
  require_same_domain(rho, nu);
  const auto& F = rho.cdf();
  const auto& S = rho.survival();
  std::vector<double> d(rho.n());
  for (std::size_t i = 0; i < rho.n(); ++i) {
    const double s = rho[i] > 0.0 ? 0.5 * (F[i] + F[i + 1]) : F[i];
    if (s <= 0.5) {
      d[i] = rho.center(i) - quantile(nu, s);
    } else {
      const double u = rho[i] > 0.0 ? 0.5 * (S[i] + S[i + 1]) : S[i];
      d[i] = rho.center(i) - upper_quantile(nu, u);
    }
  }
  return d;
}

TransportData kantorovich(const GridDensity& rho, const GridDensity& nu) {
  TransportData out;
  const auto d = displacement(rho, nu);
  const std::size_t n = rho.n();
  out.map_values.resize(n);
  out.potential_values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    out.map_values[i] =
        rho[i] > 0.0 ? rho.center(i) - d[i] : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < n; ++i)
    out.potential_values[i] = out.potential_values[i - 1] + 0.5 * rho.h() * (d[i - 1] + d[i]);
  out.w2 = wasserstein2(rho, nu);
  return out;
}

double lp_distance(const GridDensity& rho, const GridDensity& nu, double p) {
  require(rho.n() == nu.n(), ErrorCode::kInvalidArgument, "densities live on different grids");
  require_same_domain(rho, nu);
  require(p >= 1.0, ErrorCode::kInvalidArgument, "lp_distance needs p >= 1");
  if (std::isinf(p)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < rho.n(); ++i) worst = std::max(worst, std::abs(rho[i] - nu[i]));
    return worst;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < rho.n(); ++i) sum += std::pow(std::abs(rho[i] - nu[i]), p);
  return std::pow(rho.h() * sum, 1.0 / p);
}

LoadedDensity load_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open density file '" + path + "'");
  std::string line;
  std::vector<double> xs, vals;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!header) {
      if (line != "x,rho") throw Error(ErrorCode::kIo, where + ": expected header 'x,rho'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kIo, where + ": expected 'x,rho'");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vals.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kIo, where + ": not a number");
    }
  }
  if (xs.empty()) throw Error(ErrorCode::kIo, path + ": no density rows");
  const double h = 2.0 * xs[0];
  require(h > 0.0, ErrorCode::kIo, path + ": first cell centre must be positive");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - (static_cast<double>(i) + 0.5) * h) > 1e-9 * h)
      throw Error(ErrorCode::kIo, path + ": row " + std::to_string(i + 1) +
                                      " is not the centre of a uniform grid");
  double factor = 1.0;
  auto density = GridDensity::normalized(h * static_cast<double>(xs.size()), std::move(vals), &factor);
  return {std::move(density), factor};
}

}  // namespace jkoflow

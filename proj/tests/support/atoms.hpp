#pragma once
// Splits cell densities with rational masses into equal-mass atoms and builds
// the assignment problem between two such measures.

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "assignment.hpp"
#include "jkoflow/density.hpp"

namespace testsupport {

// Atom = uniform mass 1/K on [lo, hi] inside a single cell.
struct Atom {
  double lo, hi;
};

// Cell i holds counts[i] atoms; each occupies an equal slice of the cell.
inline std::vector<Atom> atomize(const std::vector<int>& counts, double l) {
  const double h = l / static_cast<double>(counts.size());
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (int a = 0; a < counts[i]; ++a) {
      const double w = h / counts[i];
      const double lo = static_cast<double>(i) * h + a * w;
      atoms.push_back({lo, lo + w});
    }
  }
  return atoms;
}

// Squared-distance cost of moving one uniform atom onto another monotonically.
inline double atom_cost(const Atom& a, const Atom& b) {
  const double d0 = a.lo - b.lo, d1 = a.hi - b.hi;
  return (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
}

inline double assignment_w2_squared(const std::vector<int>& ca, const std::vector<int>& cb,
                                    double l) {
  const auto a = atomize(ca, l), b = atomize(cb, l);
  const double mass = 1.0 / static_cast<double>(a.size());
  std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = atom_cost(a[i], b[j]);
  return mass * min_cost_assignment(cost);
}

// Random composition of `total` atoms into n cells.
inline std::vector<int> random_counts(std::mt19937_64& gen, std::size_t n, int total) {
  std::vector<int> counts(n, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int k = 0; k < total; ++k) ++counts[pick(gen)];
  return counts;
}

inline jkoflow::GridDensity density_from_counts(const std::vector<int>& counts, double l) {
  int total = 0;
  for (int c : counts) total += c;
  const double h = l / static_cast<double>(counts.size());
  std::vector<double> v(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) v[i] = counts[i] / (total * h);
  return jkoflow::GridDensity::normalized(l, std::move(v));
}

}  // namespace testsupport

#include "qsd/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

struct Atom {
  double x;
  double w;
};

std::vector<Atom> sorted_atoms(std::span<const double> points, std::span<const double> weights) {
  if (points.empty()) throw PreconditionError("ks_distance: empty empirical measure");
  if (!weights.empty() && weights.size() != points.size())
    throw ParameterError("ks_distance: weights/points size mismatch");
  std::vector<Atom> atoms(points.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    atoms[i] = {points[i], weights.empty() ? 1.0 : weights[i]};
    total += atoms[i].w;
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  for (auto& a : atoms) a.w /= total;
  return atoms;
}

}  // namespace

double ks_distance(std::span<const double> points, std::span<const double> weights,
                   const std::function<double(double)>& reference_cdf) {
  const auto atoms = sorted_atoms(points, weights);
  double cum = 0.0, d = 0.0;
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double x = atoms[i].x;
    double jump = 0.0;
    while (i < atoms.size() && atoms[i].x == x) jump += atoms[i++].w;
    const double f = reference_cdf(x);
    d = std::max(d, std::abs(f - cum));         // just below the atom
    cum += jump;
    d = std::max(d, std::abs(f - cum));         // at the atom
  }
  return d;
}

double ks_distance_discrete(std::span<const double> pts1, std::span<const double> w1,
                            std::span<const double> pts2, std::span<const double> w2) {
  const auto a = sorted_atoms(pts1, w1);
  const auto b = sorted_atoms(pts2, w2);
  double ca = 0.0, cb = 0.0, d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    const double x = (j >= b.size() || (i < a.size() && a[i].x <= b[j].x)) ? a[i].x : b[j].x;
    while (i < a.size() && a[i].x <= x) ca += a[i++].w;
    while (j < b.size() && b[j].x <= x) cb += b[j++].w;
    d = std::max(d, std::abs(ca - cb));
  }
  return d;
}

}  // namespace qsd

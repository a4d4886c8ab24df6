#include "qsd/references.hpp"

#include <cmath>
#include <numbers>

#include "qsd/errors.hpp"

namespace qsd {

double bessel_j0(double x) {
  // Power series sum (-x^2/4)^k / (k!)^2; plenty for the |x| <= ~12 we use.
  const double q = -0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double bessel_j1(double x) {
  const double q = -0.25 * x * x;
  double term = 0.5 * x, sum = term;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double bessel_j0_first_zero() {
  double lo = 2.0, hi = 3.0;  // J0(2) > 0 > J0(3)
  for (int i = 0; i < 80 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bessel_j0(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ReferenceQSD reference_bm_interval() {
  using std::numbers::pi;
  ReferenceQSD r;
  r.name = "bm-interval";
  r.lambda0 = pi * pi / 2.0;
  r.lo = 0.0;
  r.hi = 1.0;
  r.cdf = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 0.5 * (1.0 - std::cos(pi * x));
  };
  r.density = [](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 0.5 * pi * std::sin(pi * x);
  };
  r.provenance = "principal Dirichlet pair of (1/2) d^2/dx^2 on (0,1), closed form";
  return r;
}

ReferenceQSD reference_bm_disk() {
  ReferenceQSD r;
  const double j0 = bessel_j0_first_zero();
  const double norm = bessel_j1(j0) / j0;  // int_0^1 r J0(j0 r) dr
  r.name = "bm-disk";
  r.lambda0 = 0.5 * j0 * j0;
  r.lo = 0.0;
  r.hi = 1.0;
  r.density = [j0, norm](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return x * bessel_j0(j0 * x) / norm;
  };
  r.cdf = [j0](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * bessel_j1(j0 * x) / bessel_j1(j0);
  };
  r.provenance =
      "radial marginal of the principal Dirichlet pair of (1/2) Laplacian on the unit disk; "
      "j0 located by bisection on the J0 series";
  return r;
}

ReferenceQSD reference_by_name(const std::string& name) {
  if (name == "bm-interval") return reference_bm_interval();
  if (name == "bm-disk") return reference_bm_disk();
  throw ParameterError("unknown reference \"" + name + "\"");
}

double weak_trig_distance(const std::function<double(int)>& moments1,
                          const std::function<double(int)>& moments2, int k_max) {
  double d = 0.0, w = 0.5;
  for (int k = 1; k <= k_max; ++k, w *= 0.5)
    d += w * std::abs(moments1(k) - moments2(k));
  return d;
}

}  // namespace qsd

#pragma once

#include <functional>
#include <string>

namespace qsd {

// Analytic reference QSD on a 1-D coordinate (radial for the disk).
struct ReferenceQSD {
  std::string name;
  double lambda0 = 0.0;
  double lo = 0.0, hi = 1.0;  // coordinate range
  std::function<double(double)> cdf;
  std::function<double(double)> density;
  std::string provenance;
};

// density (pi/2) sin(pi x) on (0,1), lambda0 = pi^2/2.
ReferenceQSD reference_bm_interval();

// radial density r J0(j0 r)/norm on (0,1), lambda0 = j0^2/2.
ReferenceQSD reference_bm_disk();

ReferenceQSD reference_by_name(const std::string& name);

// Bessel J0/J1 by power series (valid for the |x| <= ~12 used here) and the
// first zero of J0 located by bisection to 1e-12.
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_j0_first_zero();

// Weak-topology surrogate distance on (0,1): sum_k |nu1 f_k - nu2 f_k| / 2^k
// with f_k(x) = sin(k pi x), k = 1..k_max.
double weak_trig_distance(const std::function<double(int)>& moments1,
                          const std::function<double(int)>& moments2, int k_max = 8);

}  // namespace qsd

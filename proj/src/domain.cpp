#include "qsd/domain.hpp"

#include <algorithm>
#include <cmath>

namespace qsd {

Domain make_interval_domain(double a, double b) {
  Domain d;
  d.dim = 1;
  d.contains = [a, b](std::span<const double> x) { return x[0] > a && x[0] < b; };
  d.boundary_distance = [a, b](std::span<const double> x) {
    return std::max(0.0, std::min(x[0] - a, b - x[0]));
  };
  d.box_lo = {a};
  d.box_hi = {b};
  d.interior_point = {0.5 * (a + b)};
  return d;
}

Domain make_disk_domain() {
  Domain d;
  d.dim = 2;
  d.contains = [](std::span<const double> x) {
    return x[0] * x[0] + x[1] * x[1] < 1.0;
  };
  d.boundary_distance = [](std::span<const double> x) {
    return std::max(0.0, 1.0 - std::sqrt(x[0] * x[0] + x[1] * x[1]));
  };
  d.box_lo = {-1.0, -1.0};
  d.box_hi = {1.0, 1.0};
  d.interior_point = {0.0, 0.0};
  return d;
}

}  // namespace qsd

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qsd {

// Bounded open set with a membership test and distance to the boundary.
// Invariant: contains(x) iff boundary_distance(x) > 0.
struct Domain {
  int dim = 1;
  std::function<bool(std::span<const double>)> contains;
  std::function<double(std::span<const double>)> boundary_distance;
  std::vector<double> box_lo, box_hi;   // axis-aligned bounding box
  std::vector<double> interior_point;
};

Domain make_interval_domain(double a, double b);
Domain make_disk_domain();  // open unit disk in R^2

}  // namespace qsd

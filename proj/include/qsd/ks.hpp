#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qsd {

// Kolmogorov-Smirnov distance between a weighted discrete measure on the line
// and a reference CDF: sup over the empirical support of |F_hat - F|,
// evaluated on both sides of each atom. Uniform weights when weights is empty.
double ks_distance(std::span<const double> points, std::span<const double> weights,
                   const std::function<double(double)>& reference_cdf);

// KS distance between two weighted discrete measures on the line.
double ks_distance_discrete(std::span<const double> pts1, std::span<const double> w1,
                            std::span<const double> pts2, std::span<const double> w2);

}  // namespace qsd

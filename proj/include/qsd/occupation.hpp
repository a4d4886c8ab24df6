#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qsd/rng.hpp"

namespace qsd {

// Time-weighted path states: the empirical occupation measure mu_t.
// Append-only; prefix sums give O(log n) resampling.
class OccupationMeasure {
 public:
  explicit OccupationMeasure(int dim = 1) : dim_(dim) {}

  void add(std::span<const double> x, double weight);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  double total_time() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> states_flat() const { return states_; }
  std::span<const double> weights() const { return weights_; }

  // (1/t) * sum f(x_i) w_i over entries [lo, hi); the full measure by default.
  double average(const std::function<double(std::span<const double>)>& f) const;
  double average_range(std::size_t lo, std::size_t hi,
                       const std::function<double(std::span<const double>)>& f) const;

  // Draws a stored state with probability weight/total_time.
  std::span<const double> resample(RngStream& rng) const;

 private:
  int dim_;
  std::vector<double> states_;      // flat, dim-strided
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // strictly increasing prefix sums
};

}  // namespace qsd

#include "qsd/occupation.hpp"

#include <algorithm>

#include "qsd/errors.hpp"

namespace qsd {

void OccupationMeasure::add(std::span<const double> x, double weight) {
  if (weight <= 0.0) throw ParameterError("OccupationMeasure::add: weight must be positive");
  states_.insert(states_.end(), x.begin(), x.end());
  weights_.push_back(weight);
  cumulative_.push_back(total_time() + weight);
}

double OccupationMeasure::average(
    const std::function<double(std::span<const double>)>& f) const {
  return average_range(0, size(), f);
}

double OccupationMeasure::average_range(
    std::size_t lo, std::size_t hi,
    const std::function<double(std::span<const double>)>& f) const {
  if (lo >= hi || hi > size())
    throw PreconditionError("occupation_average: empty measure or bad range");
  double num = 0.0, den = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    num += f(state(i)) * weights_[i];
    den += weights_[i];
  }
  return num / den;
}

std::span<const double> OccupationMeasure::resample(RngStream& rng) const {
  if (empty()) throw PreconditionError("resample: empty occupation measure");
  const double u = rng.uniform() * total_time();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t idx =
      std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), size() - 1);
  return state(idx);
}

}  // namespace qsd

#pragma once

#include <functional>
#include <span>

namespace qsd {

// Coefficients of dX_t = sigma(X_t) dB_t + b(X_t) dt.
// diffusion writes a dim x noise_dim matrix, row-major.
struct DiffusionModel {
  int dim = 1;
  int noise_dim = 1;
  std::function<void(std::span<const double>, std::span<double>)> drift;
  std::function<void(std::span<const double>, std::span<double>)> diffusion;
};

}  // namespace qsd

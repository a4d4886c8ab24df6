#pragma once

#include <string>
#include <vector>

#include "qsd/domain.hpp"
#include "qsd/model.hpp"

namespace qsd {

struct ModelParams {
  double drift_c = 0.0;                  // drifted-interval
  double domain_a = 0.0, domain_b = 1.0; // custom-polynomial interval
  std::vector<double> drift_coeffs;      // custom-polynomial, ascending powers
  std::vector<double> diffusion_coeffs;  // custom-polynomial, ascending powers
};

struct ModelInstance {
  DiffusionModel model;
  Domain domain;
  std::string name;
};

// Built-in models: "bm-interval", "bm-disk", "drifted-interval",
// "custom-polynomial". Unknown name throws ParameterError.
ModelInstance make_builtin_model(const std::string& name, const ModelParams& params = {});

std::vector<std::string> builtin_model_names();

}  // namespace qsd

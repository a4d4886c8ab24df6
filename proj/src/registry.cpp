#include "qsd/registry.hpp"

#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

double eval_poly(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
  return v;
}

ModelInstance bm_interval() {
  ModelInstance m;
  m.name = "bm-interval";
  m.domain = make_interval_domain(0.0, 1.0);
  m.model.dim = 1;
  m.model.noise_dim = 1;
  m.model.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  m.model.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  return m;
}

ModelInstance bm_disk() {
  ModelInstance m;
  m.name = "bm-disk";
  m.domain = make_disk_domain();
  m.model.dim = 2;
  m.model.noise_dim = 2;
  m.model.drift = [](std::span<const double>, std::span<double> out) {
    out[0] = out[1] = 0.0;
  };
  m.model.diffusion = [](std::span<const double>, std::span<double> out) {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = 1.0;
  };
  return m;
}

ModelInstance drifted_interval(double c) {
  ModelInstance m = bm_interval();
  m.name = "drifted-interval";
  m.model.drift = [c](std::span<const double>, std::span<double> out) { out[0] = c; };
  return m;
}

ModelInstance custom_polynomial(const ModelParams& p) {
  if (p.domain_b <= p.domain_a)
    throw ParameterError("custom-polynomial: domain_b must exceed domain_a");
  ModelInstance m;
  m.name = "custom-polynomial";
  m.domain = make_interval_domain(p.domain_a, p.domain_b);
  m.model.dim = 1;
  m.model.noise_dim = 1;
  auto drift_coeffs = p.drift_coeffs;
  auto diff_coeffs = p.diffusion_coeffs.empty() ? std::vector<double>{1.0} : p.diffusion_coeffs;
  m.model.drift = [drift_coeffs](std::span<const double> x, std::span<double> out) {
    out[0] = eval_poly(drift_coeffs, x[0]);
  };
  m.model.diffusion = [diff_coeffs](std::span<const double> x, std::span<double> out) {
    out[0] = eval_poly(diff_coeffs, x[0]);
  };
  return m;
}

}  // namespace

ModelInstance make_builtin_model(const std::string& name, const ModelParams& params) {
  if (name == "bm-interval") return bm_interval();
  if (name == "bm-disk") return bm_disk();
  if (name == "drifted-interval") return drifted_interval(params.drift_c);
  if (name == "custom-polynomial") return custom_polynomial(params);
  throw ParameterError("unknown model \"" + name + "\"");
}

std::vector<std::string> builtin_model_names() {
  return {"bm-interval", "bm-disk", "drifted-interval", "custom-polynomial"};
}

}  // namespace qsd

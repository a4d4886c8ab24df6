#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qsd/domain.hpp"
#include "qsd/model.hpp"
#include "qsd/rng.hpp"

namespace qsd {

struct AbsorbedPath {
  std::vector<double> states;  // flat, dim-strided; all strictly inside D
  int dim = 1;
  double dt = 0.0;
  double absorption_time = 0.0;  // (n_states-1)*dt + hit_fraction*dt
  double hit_fraction = 1.0;     // sub-step fraction of the final step, in (0,1]

  std::size_t n_states() const { return dim == 0 ? 0 : states.size() / dim; }
  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

struct StepOutcome {
  bool hit = false;
  double fraction = 1.0;  // valid when hit
};

struct SimOptions {
  std::uint64_t max_steps = 1'000'000'000ULL;
  // Brownian-bridge exit test between interior endpoints; needs
  // boundary_distance at both ends. Off by default.
  bool bridge_correction = false;
};

// One explicit Euler-Maruyama step: x + b(x) dt + sigma(x) z sqrt(dt).
// z has noise_dim entries. Throws ModelEvalError on non-finite coefficients.
void euler_step(const DiffusionModel& model, std::span<const double> x, double dt,
                std::span<const double> z, std::span<double> out);

// Interior/exit classification of the move x_prev -> x_next, with the exit
// fraction refined by bisection to within refine_tol.
StepOutcome detect_absorption(const Domain& domain, std::span<const double> x_prev,
                              std::span<const double> x_next, double refine_tol);

// Streaming observer for a single absorbed path. occupy() is called once per
// step with the state being left and the time spent there (dt, or
// hit_fraction*dt for the final step).
class StepSink {
 public:
  virtual ~StepSink() = default;
  virtual void start(std::span<const double> x0) {}
  virtual void move(std::span<const double> x_new) {}
  virtual void occupy(std::span<const double> x, double weight) {}
};

// Runs Euler-Maruyama from x0 until the first boundary hit; returns the
// refined absorption time. Noise is drawn from rng (noise_dim normals per
// step). Reproducible given the stream state.
double simulate_absorbed(const DiffusionModel& model, const Domain& domain,
                         std::span<const double> x0, double dt, RngStream& rng,
                         StepSink& sink, const SimOptions& opts = {});

AbsorbedPath simulate_until_absorption(const DiffusionModel& model, const Domain& domain,
                                       std::span<const double> x0, double dt, RngStream& rng,
                                       const SimOptions& opts = {});

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte Carlo Green operator: averages int_0^tau f(X_s) ds over n_samples
// paths started at x. Path i uses the stream derived from (seed, i).
McEstimate estimate_green_mc(const DiffusionModel& model, const Domain& domain,
                             std::span<const double> x,
                             const std::function<double(std::span<const double>)>& f,
                             std::size_t n_samples, double dt, std::uint64_t seed,
                             const SimOptions& opts = {});

}  // namespace qsd

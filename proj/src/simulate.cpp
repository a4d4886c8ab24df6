#include "qsd/simulate.hpp"

#include <cmath>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

std::string point_to_string(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

bool all_finite(std::span<const double> v) {
  for (double a : v)
    if (!std::isfinite(a)) return false;
  return true;
}

// Unit outward-ish normal direction from the finite-difference gradient of
// the boundary distance; used only by the bridge correction.
double normal_diffusivity(const DiffusionModel& model, const Domain& domain,
                          std::span<const double> x, std::vector<double>& scratch) {
  const int d = model.dim;
  const int r = model.noise_dim;
  scratch.resize(static_cast<std::size_t>(d) * r + 2 * d);
  std::span<double> sigma(scratch.data(), static_cast<std::size_t>(d) * r);
  std::span<double> grad(scratch.data() + d * r, d);
  std::span<double> xp(scratch.data() + d * r + d, d);
  const double h = 1e-6;
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) xp[k] = x[k];
    xp[i] = x[i] + h;
    double up = domain.boundary_distance(xp);
    xp[i] = x[i] - h;
    double um = domain.boundary_distance(xp);
    grad[i] = (up - um) / (2 * h);
  }
  double g2 = 0.0;
  for (int i = 0; i < d; ++i) g2 += grad[i] * grad[i];
  if (g2 <= 0.0) return 0.0;
  const double gn = std::sqrt(g2);
  model.diffusion(x, sigma);
  // |sigma^T n|^2
  double out = 0.0;
  for (int j = 0; j < r; ++j) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += sigma[i * r + j] * grad[i] / gn;
    out += s * s;
  }
  return out;
}

}  // namespace

void euler_step(const DiffusionModel& model, std::span<const double> x, double dt,
                std::span<const double> z, std::span<double> out) {
  if (dt <= 0.0) throw ParameterError("euler_step: dt must be positive");
  const int d = model.dim;
  const int r = model.noise_dim;
  thread_local std::vector<double> scratch;
  scratch.resize(static_cast<std::size_t>(d) + static_cast<std::size_t>(d) * r);
  std::span<double> b(scratch.data(), d);
  std::span<double> sigma(scratch.data() + d, static_cast<std::size_t>(d) * r);
  model.drift(x, b);
  model.diffusion(x, sigma);
  if (!all_finite(b) || !all_finite(sigma))
    throw ModelEvalError("non-finite drift/diffusion at " + point_to_string(x));
  const double sq = std::sqrt(dt);
  for (int i = 0; i < d; ++i) {
    double noise = 0.0;
    for (int j = 0; j < r; ++j) noise += sigma[i * r + j] * z[j];
    out[i] = x[i] + b[i] * dt + noise * sq;
  }
}

StepOutcome detect_absorption(const Domain& domain, std::span<const double> x_prev,
                              std::span<const double> x_next, double refine_tol) {
  if (refine_tol <= 0.0) throw ParameterError("detect_absorption: refine_tol must be positive");
  if (domain.contains(x_next)) return {};
  const int d = domain.dim;
  thread_local std::vector<double> mid;
  mid.resize(d);
  double lo = 0.0, hi = 1.0;  // lo inside, hi outside
  while (hi - lo > refine_tol) {
    const double m = 0.5 * (lo + hi);
    for (int i = 0; i < d; ++i) mid[i] = x_prev[i] + m * (x_next[i] - x_prev[i]);
    (domain.contains(mid) ? lo : hi) = m;
  }
  return {.hit = true, .fraction = 0.5 * (lo + hi)};
}

double simulate_absorbed(const DiffusionModel& model, const Domain& domain,
                         std::span<const double> x0, double dt, RngStream& rng,
                         StepSink& sink, const SimOptions& opts) {
  if (dt <= 0.0) throw ParameterError("simulate_absorbed: dt must be positive");
  if (!domain.contains(x0))
    throw PreconditionError("simulate_absorbed: start " + point_to_string(x0) +
                            " is outside the domain");
  const int d = model.dim;
  const int r = model.noise_dim;
  const double refine_tol = 1e-9;
  thread_local std::vector<double> buf;
  buf.resize(2 * static_cast<std::size_t>(d) + r);
  std::span<double> x(buf.data(), d), xn(buf.data() + d, d), z(buf.data() + 2 * d, r);
  for (int i = 0; i < d; ++i) x[i] = x0[i];

  thread_local std::vector<double> bridge_scratch;
  sink.start(x);
  std::uint64_t steps = 0;
  while (true) {
    if (steps >= opts.max_steps)
      throw RunawayPathError("no absorption within " + std::to_string(opts.max_steps) +
                             " steps (dt=" + std::to_string(dt) + ")");
    for (int j = 0; j < r; ++j) z[j] = rng.normal();
    euler_step(model, x, dt, z, xn);
    ++steps;
    const StepOutcome oc = detect_absorption(domain, x, xn, refine_tol);
    if (oc.hit) {
      sink.occupy(x, oc.fraction * dt);
      return static_cast<double>(steps - 1) * dt + oc.fraction * dt;
    }
    if (opts.bridge_correction) {
      const double dp = domain.boundary_distance(x);
      const double dn = domain.boundary_distance(xn);
      const double nu = normal_diffusivity(model, domain, x, bridge_scratch);
      if (nu > 0.0) {
        const double p_exit = std::exp(-2.0 * dp * dn / (nu * dt));
        if (rng.uniform() < p_exit) {
          // Mid-step excursion hit the boundary; charge half the step.
          sink.occupy(x, 0.5 * dt);
          return static_cast<double>(steps - 1) * dt + 0.5 * dt;
        }
      }
    }
    sink.occupy(x, dt);
    for (int i = 0; i < d; ++i) x[i] = xn[i];
    sink.move(x);
  }
}

namespace {

class PathCollector final : public StepSink {
 public:
  explicit PathCollector(AbsorbedPath& path) : path_(path) {}
  void start(std::span<const double> x0) override {
    path_.states.assign(x0.begin(), x0.end());
  }
  void move(std::span<const double> x) override {
    path_.states.insert(path_.states.end(), x.begin(), x.end());
  }
  void occupy(std::span<const double>, double w) override { last_weight_ = w; }
  double last_weight() const { return last_weight_; }

 private:
  AbsorbedPath& path_;
  double last_weight_ = 0.0;
};

class GreenAccumulator final : public StepSink {
 public:
  explicit GreenAccumulator(const std::function<double(std::span<const double>)>& f)
      : f_(f) {}
  void occupy(std::span<const double> x, double w) override { sum_ += f_(x) * w; }
  double sum() const { return sum_; }

 private:
  const std::function<double(std::span<const double>)>& f_;
  double sum_ = 0.0;
};

}  // namespace

AbsorbedPath simulate_until_absorption(const DiffusionModel& model, const Domain& domain,
                                       std::span<const double> x0, double dt, RngStream& rng,
                                       const SimOptions& opts) {
  AbsorbedPath path;
  path.dim = model.dim;
  path.dt = dt;
  PathCollector sink(path);
  path.absorption_time = simulate_absorbed(model, domain, x0, dt, rng, sink, opts);
  path.hit_fraction = sink.last_weight() / dt;
  return path;
}

McEstimate estimate_green_mc(const DiffusionModel& model, const Domain& domain,
                             std::span<const double> x,
                             const std::function<double(std::span<const double>)>& f,
                             std::size_t n_samples, double dt, std::uint64_t seed,
                             const SimOptions& opts) {
  if (n_samples < 2) throw ParameterError("estimate_green_mc: n_samples must be >= 2");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    RngStream rng = RngStream::derive(seed, i);
    GreenAccumulator acc(f);
    simulate_absorbed(model, domain, x, dt, rng, acc, opts);
    sum += acc.sum();
    sum_sq += acc.sum() * acc.sum();
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {.estimate = mean, .std_error = std::sqrt(var / n)};
}

}  // namespace qsd

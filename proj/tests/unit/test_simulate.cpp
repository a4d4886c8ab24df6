#include <doctest.h>

#include <cmath>
#include <vector>

#include "qsd/errors.hpp"
#include "qsd/registry.hpp"
#include "qsd/simulate.hpp"

using namespace qsd;

namespace {

DiffusionModel model_1d(std::function<double(double)> b, std::function<double(double)> s) {
  DiffusionModel m;
  m.dim = 1;
  m.noise_dim = 1;
  m.drift = [b](std::span<const double> x, std::span<double> out) { out[0] = b(x[0]); };
  m.diffusion = [s](std::span<const double> x, std::span<double> out) { out[0] = s(x[0]); };
  return m;
}

// Mean exit time of standard BM from (0,1): solve (1/2) u'' = -1 with
// Dirichlet ends on a fine grid (tridiagonal elimination). Independent of the
// closed form x(1-x) it backs up.
double fd_mean_exit_time(double x0, int n = 4096) {
  const double h = 1.0 / n;
  std::vector<double> a(n - 1, 1.0), b(n - 1, -2.0), c(n - 1, 1.0), r(n - 1, -2.0 * h * h);
  for (int i = 1; i < n - 1; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  std::vector<double> u(n - 1);
  u[n - 2] = r[n - 2] / b[n - 2];
  for (int i = n - 3; i >= 0; --i) u[i] = (r[i] - c[i] * u[i + 1]) / b[i];
  const int k = static_cast<int>(x0 * n) - 1;
  return u[k];
}

}  // namespace

TEST_CASE("euler_step degenerate coefficients return the start point") {
  auto m = model_1d([](double) { return 0.0; }, [](double) { return 0.0; });
  double out;
  const double x = 0.37, z = 1.7;
  euler_step(m, {&x, 1}, 0.05, {&z, 1}, {&out, 1});
  CHECK(out == x);
}

TEST_CASE("euler_step pure diffusion") {
  auto m = model_1d([](double) { return 0.0; }, [](double) { return 1.0; });
  double out;
  const double x = 0.5, z = 1.0;
  euler_step(m, {&x, 1}, 0.01, {&z, 1}, {&out, 1});
  CHECK(out == doctest::Approx(0.6).epsilon(1e-14));  // 0.5 + sqrt(0.01)
}

TEST_CASE("euler_step explicit Euler drift step") {
  auto m = model_1d([](double x) { return -x; }, [](double) { return 0.0; });
  double out;
  const double x = 1.0, z = 0.0;
  euler_step(m, {&x, 1}, 0.1, {&z, 1}, {&out, 1});
  CHECK(out == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("euler_step reports the offending point on non-finite coefficients") {
  auto m = model_1d([](double x) { return 1.0 / (x - 0.25); }, [](double) { return 1.0; });
  double out;
  const double x = 0.25, z = 0.0;
  double bad = std::numeric_limits<double>::quiet_NaN();
  auto m2 = model_1d([bad](double) { return bad; }, [](double) { return 1.0; });
  CHECK_THROWS_WITH_AS(euler_step(m2, {&x, 1}, 0.1, {&z, 1}, {&out, 1}),
                       doctest::Contains("0.25"), ModelEvalError);
}

TEST_CASE("detect_absorption") {
  const Domain d = make_interval_domain(0.0, 1.0);
  const double a = 0.5;

  SUBCASE("interior move") {
    const double b = 0.6;
    const auto oc = detect_absorption(d, {&a, 1}, {&b, 1}, 1e-6);
    CHECK_FALSE(oc.hit);
  }
  SUBCASE("crossing zero halfway") {
    const double b = -0.5;
    const auto oc = detect_absorption(d, {&a, 1}, {&b, 1}, 1e-6);
    CHECK(oc.hit);
    CHECK(oc.fraction == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("crossing one halfway") {
    const double p = 0.9, q = 1.1;
    const auto oc = detect_absorption(d, {&p, 1}, {&q, 1}, 1e-6);
    CHECK(oc.hit);
    CHECK(oc.fraction == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("bad tolerance") {
    const double b = -0.5;
    CHECK_THROWS_AS(detect_absorption(d, {&a, 1}, {&b, 1}, 0.0), ParameterError);
  }
  SUBCASE("random segments match linear interpolation") {
    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
      const double p = 0.05 + 0.9 * rng.uniform();
      const double q = p + (rng.uniform() - 0.5) * 3.0;
      const auto oc = detect_absorption(d, {&p, 1}, {&q, 1}, 1e-9);
      if (q > 0.0 && q < 1.0) {
        CHECK_FALSE(oc.hit);
      } else {
        const double boundary = q <= 0.0 ? 0.0 : 1.0;
        const double exact = (boundary - p) / (q - p);
        REQUIRE(oc.hit);
        CHECK(oc.fraction == doctest::Approx(exact).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("simulate_until_absorption bookkeeping and containment") {
  const auto inst = make_builtin_model("bm-interval");
  RngStream rng(11);
  const double x0 = 0.999;
  const auto path = simulate_until_absorption(inst.model, inst.domain, {&x0, 1}, 1e-3, rng);
  CHECK(path.absorption_time > 0.0);
  for (std::size_t i = 0; i < path.n_states(); ++i) {
    CHECK(path.state(i)[0] > 0.0);
    CHECK(path.state(i)[0] < 1.0);
  }
  const double expected =
      (static_cast<double>(path.n_states()) - 1.0) * path.dt + path.hit_fraction * path.dt;
  CHECK(path.absorption_time == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("simulate_until_absorption is bit-reproducible per seed") {
  const auto inst = make_builtin_model("bm-interval");
  const double x0 = 0.5;
  RngStream r1(99), r2(99), r3(100);
  const auto p1 = simulate_until_absorption(inst.model, inst.domain, {&x0, 1}, 1e-3, r1);
  const auto p2 = simulate_until_absorption(inst.model, inst.domain, {&x0, 1}, 1e-3, r2);
  const auto p3 = simulate_until_absorption(inst.model, inst.domain, {&x0, 1}, 1e-3, r3);
  CHECK(p1.states == p2.states);
  CHECK(p1.absorption_time == p2.absorption_time);
  CHECK(p1.absorption_time != p3.absorption_time);
}

TEST_CASE("deterministic outward drift exits after distance/speed") {
  auto m = model_1d([](double) { return 1.0; }, [](double) { return 0.0; });
  const Domain d = make_interval_domain(0.0, 1.0);
  RngStream rng(1);
  const double x0 = 0.7, dt = 1e-3;
  const auto path = simulate_until_absorption(m, d, {&x0, 1}, dt, rng);
  CHECK(std::abs(path.absorption_time - 0.3) <= dt + 1e-12);
}

TEST_CASE("runaway paths trip the step budget") {
  auto m = model_1d([](double) { return 0.0; }, [](double) { return 1e-6; });
  const Domain d = make_interval_domain(0.0, 1.0);
  RngStream rng(5);
  SimOptions opts;
  opts.max_steps = 1000;
  const double x0 = 0.5;
  CHECK_THROWS_AS(simulate_until_absorption(m, d, {&x0, 1}, 1e-3, rng, opts),
                  RunawayPathError);
}

TEST_CASE("mean exit time of BM matches the Dirichlet oracle") {
  const auto inst = make_builtin_model("bm-interval");
  const double dt = 2e-4;
  const std::size_t n = 20000;
  const double x0 = 0.5;

  // oracle: (1/2) u'' = -1, u(0)=u(1)=0  =>  u(x) = x(1-x)
  const double oracle = fd_mean_exit_time(x0);
  CHECK(oracle == doctest::Approx(0.25).epsilon(1e-5));

  const auto est = estimate_green_mc(
      inst.model, inst.domain, {&x0, 1}, [](std::span<const double>) { return 1.0; }, n, dt,
      2024);
  const double budget = 3.0 * est.std_error + 2.0 * std::sqrt(dt);
  CHECK(std::abs(est.estimate - oracle) <= budget);
}

TEST_CASE("estimate_green_mc basics") {
  const auto inst = make_builtin_model("bm-interval");
  const double x0 = 0.5;
  SUBCASE("zero integrand") {
    const auto est = estimate_green_mc(
        inst.model, inst.domain, {&x0, 1}, [](std::span<const double>) { return 0.0; }, 100,
        1e-3, 1);
    CHECK(est.estimate == 0.0);
    CHECK(est.std_error == 0.0);
  }
  SUBCASE("needs two samples") {
    CHECK_THROWS_AS(estimate_green_mc(inst.model, inst.domain, {&x0, 1},
                                      [](std::span<const double>) { return 1.0; }, 1, 1e-3, 1),
                    ParameterError);
  }
  SUBCASE("deterministic exit has zero standard error") {
    auto m = model_1d([](double) { return 1.0; }, [](double) { return 0.0; });
    const Domain d = make_interval_domain(0.0, 1.0);
    const auto est = estimate_green_mc(
        m, d, {&x0, 1}, [](std::span<const double>) { return 1.0; }, 16, 1e-3, 1);
    CHECK(est.std_error == 0.0);
    CHECK(est.estimate == doctest::Approx(0.5).epsilon(0.01));
  }
}

TEST_CASE("Green MC traces the exit-time parabola across the interval") {
  const auto inst = make_builtin_model("bm-interval");
  const double dt = 2e-4;
  for (const double x : {0.2, 0.4, 0.6, 0.8}) {
    const auto est = estimate_green_mc(
        inst.model, inst.domain, {&x, 1}, [](std::span<const double>) { return 1.0; }, 4000,
        dt, 31u + static_cast<unsigned>(10 * x));
    const double budget = 3.0 * est.std_error + 2.0 * std::sqrt(dt);
    CHECK(std::abs(est.estimate - x * (1.0 - x)) <= budget);
  }
}

TEST_CASE("empirical survival decays at the Dirichlet rate") {
  const auto inst = make_builtin_model("bm-interval");
  const double dt = 2e-4;
  const int n = 30000;
  const double x0 = 0.5;
  std::vector<double> taus(n);
  for (int i = 0; i < n; ++i) {
    RngStream rng = RngStream::derive(555, i);
    struct Nop final : StepSink {
    } nop;
    taus[i] = simulate_absorbed(inst.model, inst.domain, {&x0, 1}, dt, rng, nop);
  }
  // log-survival slope over t in [0.3, 0.9]
  const std::vector<double> grid{0.3, 0.45, 0.6, 0.75, 0.9};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const double t : grid) {
    const double surv =
        static_cast<double>(std::count_if(taus.begin(), taus.end(),
                                          [t](double tau) { return tau > t; })) /
        n;
    REQUIRE(surv > 0.0);
    sx += t;
    sy += std::log(surv);
    sxx += t * t;
    sxy += t * std::log(surv);
  }
  const double m = static_cast<double>(grid.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double lambda0 = 4.934802200544679;  // pi^2/2
  CHECK(std::abs(-slope - lambda0) / lambda0 <= 0.10);
}

TEST_CASE("bridge correction shortens coarse-step exit times") {
  const auto inst = make_builtin_model("bm-interval");
  const double x0 = 0.5, dt = 5e-3;
  auto mean_tau = [&](bool bridge) {
    SimOptions opts;
    opts.bridge_correction = bridge;
    const auto est = estimate_green_mc(
        inst.model, inst.domain, {&x0, 1}, [](std::span<const double>) { return 1.0; }, 4000,
        dt, 77, opts);
    return est.estimate;
  };
  const double plain = mean_tau(false);
  const double corrected = mean_tau(true);
  CHECK(corrected < plain);               // discrete monitoring overshoots
  CHECK(std::abs(corrected - 0.25) < std::abs(plain - 0.25));
}

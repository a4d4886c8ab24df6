#include <doctest.h>

#include <cmath>

#include "qsd/chain.hpp"
#include "qsd/errors.hpp"
#include "qsd/spectral.hpp"

using namespace qsd;

namespace {

AbsorbingChain two_state() {
  Eigen::MatrixXd Q(2, 2);
  Q << -2, 1, 1, -2;
  return AbsorbingChain(Q);
}

// Taylor sum of exp(tQ) with scaling and squaring; brute-force oracle,
// independent of the eigen-decomposition route used by semigroup().
Eigen::MatrixXd expm_taylor(Eigen::MatrixXd M) {
  int squarings = 0;
  while (M.cwiseAbs().maxCoeff() > 0.25) {
    M /= 2.0;
    ++squarings;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(M.rows(), M.cols());
  Eigen::MatrixXd term = out;
  for (int k = 1; k <= 30; ++k) {
    term = term * M / static_cast<double>(k);
    out += term;
  }
  for (int s = 0; s < squarings; ++s) out = out * out;
  return out;
}

}  // namespace

TEST_CASE("two-state spectral data by hand") {
  const auto sd = spectral(two_state());
  CHECK(sd.lambda0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sd.gamma == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sd.alpha(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sd.alpha(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sd.eta(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sd.eta(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-state chain") {
  Eigen::MatrixXd Q(1, 1);
  Q << -3.5;
  const auto sd = spectral(AbsorbingChain(Q));
  CHECK(sd.lambda0 == doctest::Approx(3.5));
  CHECK(sd.alpha(0) == 1.0);
  CHECK(sd.eta(0) == 1.0);
  CHECK(std::isinf(sd.gamma));
}

TEST_CASE("reducible chains are refused by spectral") {
  Eigen::MatrixXd Q(2, 2);
  Q << -2, 1, 0, -1;
  CHECK_THROWS_AS(spectral(AbsorbingChain(Q)), ReducibleChainError);
}

TEST_CASE("spectral invariants on random chains") {
  RngStream rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 11);
    const auto chain = random_chain(n, rng);
    const auto sd = spectral(chain);
    const double scale = chain.Q().cwiseAbs().maxCoeff();
    CHECK(sd.lambda0 > 0.0);
    CHECK(sd.gamma > 0.0);
    CHECK((sd.alpha.transpose() * chain.Q() + sd.lambda0 * sd.alpha.transpose())
              .cwiseAbs()
              .maxCoeff() <= 1e-10 * scale);
    CHECK((chain.Q() * sd.eta + sd.lambda0 * sd.eta).cwiseAbs().maxCoeff() <=
          1e-10 * scale * std::max(1.0, sd.eta.maxCoeff()));
    CHECK(std::abs(sd.alpha.dot(sd.eta) - 1.0) <= 1e-10);
    CHECK(sd.alpha.minCoeff() > 0.0);
    CHECK(sd.eta.minCoeff() > 0.0);
  }
}

TEST_CASE("green operator") {
  const auto chain = two_state();
  const auto A = green(chain);
  CHECK(A(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(A(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(A(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // A 1 = mean absorption times
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  CHECK(((A * ones).array() - 1.0).abs().maxCoeff() <= 1e-12);

  SUBCASE("identity and alpha A f = alpha f / lambda0 on random chains") {
    RngStream rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(rng.uniform() * 14);
      const auto c = random_chain(n, rng);
      const auto Ac = green(c);
      const double resid =
          (Ac * (-c.Q()) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
      CHECK(resid <= 1e-10);
      const auto sd = spectral(c);
      for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd f(n);
        for (int j = 0; j < n; ++j) f(j) = 2.0 * rng.uniform() - 1.0;
        const double lhs = sd.alpha.transpose() * Ac * f;
        const double rhs = sd.alpha.dot(f) / sd.lambda0;
        CHECK(std::abs(lhs - rhs) <=
              1e-10 * std::max(1.0, f.cwiseAbs().maxCoeff() / sd.lambda0));
      }
    }
  }
  SUBCASE("no-absorption singularity") {
    // State 1 absorbs; state 2 is inert, so -Q is singular.
    Eigen::MatrixXd Q(2, 2);
    Q << -1, 0, 0, 0;
    CHECK_THROWS_AS(green(AbsorbingChain(Q)), NoAbsorptionError);
  }
}

TEST_CASE("semigroup") {
  const auto chain = two_state();
  SUBCASE("t=0 is the identity") {
    CHECK(semigroup(chain, 0.0).isIdentity(0.0));
  }
  SUBCASE("scalar chain is a plain exponential") {
    Eigen::MatrixXd Q(1, 1);
    Q << -1.7;
    CHECK(semigroup(AbsorbingChain(Q), 2.0)(0, 0) ==
          doctest::Approx(std::exp(-3.4)).epsilon(1e-12));
  }
  SUBCASE("Chapman-Kolmogorov and range") {
    RngStream rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      const auto c = random_chain(2 + static_cast<int>(rng.uniform() * 8), rng);
      const double s = 0.2 + rng.uniform(), t = 0.2 + rng.uniform();
      const Eigen::MatrixXd lhs = semigroup(c, s) * semigroup(c, t);
      const Eigen::MatrixXd rhs = semigroup(c, s + t);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(rhs.minCoeff() >= 0.0);
      CHECK(rhs.rowwise().sum().maxCoeff() <= 1.0 + 1e-12);
    }
  }
  SUBCASE("matches a brute-force Taylor exponential") {
    RngStream rng(9);
    const auto c = random_chain(6, rng);
    const double t = 0.7;
    CHECK((semigroup(c, t) - expm_taylor(t * c.Q())).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("conditional_law") {
  const auto chain = two_state();
  const auto sd = spectral(chain);
  SUBCASE("the QSD is a fixed point") {
    for (const double t : {0.5, 1.0, 3.0})
      CHECK(tv_distance(conditional_law(chain, sd.alpha, t), sd.alpha) <= 1e-12);
  }
  SUBCASE("t=0 returns mu") {
    Eigen::VectorXd mu(2);
    mu << 0.3, 0.7;
    CHECK(tv_distance(conditional_law(chain, mu, 0.0), mu) == 0.0);
  }
  SUBCASE("TV decay is log-linear with slope -gamma") {
    // exact diagonalization: TV(t) = e^{-2t}/2 from mu = (1,0)
    Eigen::VectorXd mu(2);
    mu << 1.0, 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const double t : {1.0, 2.0, 3.0}) {
      const double tv = tv_distance(conditional_law(chain, mu, t), sd.alpha);
      CHECK(tv == doctest::Approx(0.5 * std::exp(-2.0 * t)).epsilon(1e-9));
      sx += t;
      sy += std::log(tv);
      sxx += t * t;
      sxy += t * std::log(tv);
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    CHECK(std::abs(slope - (-2.0)) <= 0.01);
  }
  SUBCASE("survival underflow raises a horizon error") {
    Eigen::VectorXd mu(2);
    mu << 1.0, 0.0;
    CHECK_THROWS_AS(conditional_law(chain, mu, 800.0), HorizonError);
  }
}

TEST_CASE("A1/A2 checks") {
  SUBCASE("two-state symmetric chain at t0=1, exact kernel by hand") {
    // P_t = e^{-2t} [[cosh t, sinh t], [sinh t, cosh t]] gives
    // c1 = 1 - e^{-2 t0} and, since nu = alpha, c2 = 1.
    const auto r = check_A1_A2(two_state(), 1.0);
    CHECK(r.ok);
    CHECK(r.c1 == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
    CHECK(r.c2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.nu(0) == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("one-state chain is trivially minorized") {
    Eigen::MatrixXd Q(1, 1);
    Q << -2.0;
    const auto r = check_A1_A2(AbsorbingChain(Q), 1.0);
    CHECK(r.ok);
    CHECK(r.c1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.c2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("transient state feeding another still mixes for large t0") {
    Eigen::MatrixXd Q(2, 2);
    Q << -2, 1, 0, -1;  // reducible: 1 -> 2 -> absorption
    const AbsorbingChain chain(Q);
    const auto r = check_A1_A2(chain, 2.0);
    CHECK(r.c1 > 0.0);
    CHECK(r.c2 > 0.0);
    // brute-force kernel: conditioned row mins from the Taylor exponential
    const Eigen::MatrixXd P = expm_taylor(2.0 * Q);
    const Eigen::VectorXd surv = P.rowwise().sum();
    double c1 = 0.0;
    for (int j = 0; j < 2; ++j)
      c1 += std::min(P(0, j) / surv(0), P(1, j) / surv(1));
    CHECK(r.c1 == doctest::Approx(c1).epsilon(1e-9));
  }
  SUBCASE("bad t0") {
    CHECK_THROWS_AS(check_A1_A2(two_state(), 0.0), ParameterError);
  }
}

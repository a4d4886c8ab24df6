#include <cmath>
#include <complex>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "qsd/errors.hpp"
#include "qsd/spectral.hpp"
#include "spectral_detail.hpp"

namespace qsd {

namespace {

// Regularized upper incomplete gamma Q(n, x) for integer n:
// e^{-x} sum_{k<n} x^k / k!.
double upper_gamma_q(int n, double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < n; ++k) {
    term *= x / k;
    sum += term;
  }
  return std::exp(-x) * sum;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

GreenPowerValues green_power_values(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& f, int n) {
  if (n < 1) throw ParameterError("green_power: n must be >= 1");
  GreenPowerValues out;

  // Route one: repeated solves against -Q.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(-chain.Q());
  Eigen::VectorXd u = f;
  for (int k = 0; k < n; ++k) u = lu.solve(u);
  out.matrix_value = mu.dot(u);

  // Route two: quadrature of u^{n-1}/(n-1)! mu P_u f over [0, U], with U
  // pushed out until the Gamma tail is negligible.
  const auto eig = detail::complex_eig(chain.Q());
  std::function<double(double)> mu_P_f;
  double decay_rate;
  double amp;
  if (eig.usable) {
    const Eigen::RowVectorXcd c =
        mu.transpose().cast<std::complex<double>>() * eig.V;
    const Eigen::VectorXcd g = eig.Vinv * f.cast<std::complex<double>>();
    Eigen::VectorXcd coef(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) coef(i) = c(i) * g(i);
    const Eigen::VectorXcd w = eig.w;
    mu_P_f = [coef, w](double t) {
      std::complex<double> s = 0.0;
      for (Eigen::Index i = 0; i < coef.size(); ++i) s += coef(i) * std::exp(t * w[i]);
      return s.real();
    };
    decay_rate = -w.real().maxCoeff();
    amp = coef.cwiseAbs().sum();
  } else {
    const Eigen::MatrixXd Q = chain.Q();
    mu_P_f = [Q, mu, f](double t) {
      return mu.dot((Eigen::MatrixXd((t * Q).exp())) * f);
    };
    decay_rate = chain.absorb_rate().minCoeff();
    if (!(decay_rate > 0.0)) decay_rate = 1e-3;
    amp = f.cwiseAbs().maxCoeff();
  }

  const double target = 1e-12 * std::max(std::abs(out.matrix_value), 1e-30);
  double U = (n + 10.0) / decay_rate;
  while (amp * upper_gamma_q(n, decay_rate * U) / std::pow(decay_rate, n) > target &&
         U < 1e8) {
    U *= 2.0;
  }

  const double lf = log_factorial(n - 1);
  auto integrand = [&](double t) {
    const double weight =
        (t <= 0.0 && n > 1) ? 0.0 : std::exp((n - 1) * std::log(std::max(t, 1e-300)) - lf);
    return weight * mu_P_f(t);
  };
  double abs_err = 0.0;
  out.quadrature_value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, U, 15, 1e-10, &abs_err);
  const double scale = std::max({std::abs(out.matrix_value), std::abs(out.quadrature_value),
                                 1e-300});
  if (!(abs_err <= 1e-6 * scale))
    throw NumericalError("green_power quadrature did not converge");
  return out;
}

double green_power(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                   const Eigen::VectorXd& f, int n) {
  const GreenPowerValues v = green_power_values(chain, mu, f, n);
  const double scale = std::max(std::abs(v.matrix_value), 1e-300);
  if (std::abs(v.matrix_value - v.quadrature_value) > 1e-6 * scale)
    throw NumericalError("green_power: matrix and quadrature routes disagree");
  return v.matrix_value;
}

}  // namespace qsd

#include "qsd/flow.hpp"

#include <algorithm>
#include <cmath>

#include "qsd/errors.hpp"
#include "qsd/spectral.hpp"
#include "spectral_detail.hpp"

namespace qsd {

Eigen::VectorXd flow_rhs(const Eigen::MatrixXd& A, const Eigen::VectorXd& nu) {
  const Eigen::VectorXd nuA = A.transpose() * nu;
  return nuA - nuA.sum() * nu;
}

namespace {

// Cash-Karp embedded 4(5) pair.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                 a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
constexpr double d1 = b1 - 2825.0 / 27648, d3 = b3 - 18575.0 / 48384,
                 d4 = b4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = b6 - 1.0 / 4;

}  // namespace

FlowTrajectory flow_ode(const AbsorbingChain& chain, const Eigen::VectorXd& nu, double T,
                        double tol, int n_out) {
  if (T <= 0.0) throw ParameterError("flow_ode: T must be positive");
  if (tol <= 0.0) throw ParameterError("flow_ode: tol must be positive");
  if (n_out < 2) throw ParameterError("flow_ode: n_out must be >= 2");
  if (std::abs(nu.sum() - 1.0) > 1e-9) throw ParameterError("flow_ode: nu must sum to 1");

  const Eigen::MatrixXd A = green(chain);
  const auto eigA = detail::complex_eig(A);
  auto rhs = [&](const Eigen::VectorXd& y) { return flow_rhs(A, y); };

  FlowTrajectory out;
  Eigen::VectorXd y = nu;
  double t = 0.0;
  double h = T / 100.0;
  const double h_min = 1e-14 * std::max(1.0, T);

  auto record = [&](double time, const Eigen::VectorXd& state) {
    out.times.push_back(time);
    out.states.push_back(state);
    const Eigen::VectorXd closed =
        detail::normalized_exp_flow_cached(A, eigA, nu, time);
    const double tv = tv_distance(state, closed);
    out.tv_vs_closed_form.push_back(tv);
    out.max_tv = std::max(out.max_tv, tv);
  };

  record(0.0, y);
  for (int i = 1; i < n_out; ++i) {
    const double t_target = T * i / (n_out - 1);
    while (t < t_target) {
      h = std::min(h, t_target - t);
      const Eigen::VectorXd k1 = rhs(y);
      const Eigen::VectorXd k2 = rhs(y + h * (a21 * k1));
      const Eigen::VectorXd k3 = rhs(y + h * (a31 * k1 + a32 * k2));
      const Eigen::VectorXd k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Eigen::VectorXd k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Eigen::VectorXd k6 =
          rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Eigen::VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
      const Eigen::VectorXd err = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);

      double err_norm = 0.0;
      for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double sc = tol + tol * std::max(std::abs(y[j]), std::abs(y5[j]));
        err_norm = std::max(err_norm, std::abs(err[j]) / sc);
      }
      if (err_norm <= 1.0) {
        t += h;
        y = y5;
      }
      const double factor =
          err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
      if (h < h_min)
        throw StiffnessError("flow_ode: step size underflow at t=" + std::to_string(t));
    }
    record(t_target, y);
  }
  return out;
}

}  // namespace qsd

#include "qsd/apt.hpp"

#include <algorithm>
#include <cmath>

#include "qsd/errors.hpp"
#include "qsd/spectral.hpp"
#include "spectral_detail.hpp"

namespace qsd {

std::vector<double> apt_time_change(const std::function<Eigen::VectorXd(std::size_t)>& eta_of,
                                    std::size_t n_max, const AbsorbingChain& chain) {
  const Eigen::VectorXd a1 = green(chain) * Eigen::VectorXd::Ones(chain.n());
  // tau_1 = 0, tau_n = tau_{n-1} + 1/(n eta_{n-1} A 1).
  std::vector<double> tau(n_max + 1, 0.0);
  for (std::size_t k = 2; k <= n_max; ++k) {
    const double drift = eta_of(k - 1).dot(a1);
    if (!(drift > 0.0)) throw NumericalError("apt_time_change: eta A 1 not positive");
    tau[k] = tau[k - 1] + 1.0 / (static_cast<double>(k) * drift);
  }
  return tau;
}

AptReport apt_check_measures(const std::function<Eigen::VectorXd(std::size_t)>& eta_of,
                             std::size_t n_max, const AbsorbingChain& chain, double T,
                             const std::vector<double>& t_grid, int s_points) {
  if (T <= 0.0) throw ParameterError("apt_check: T must be positive");
  if (s_points < 2) throw ParameterError("apt_check: s_points must be >= 2");
  if (n_max < 2) throw ParameterError("apt_check: need at least two measures");

  const std::vector<double> tau = apt_time_change(eta_of, n_max, chain);
  const double tau_end = tau[n_max];

  const Eigen::MatrixXd A = green(chain);
  const auto eigA = detail::complex_eig(A);

  auto eta_tilde = [&](double t) -> Eigen::VectorXd {
    // bracketing index: tau[n] <= t <= tau[n+1]
    const auto it = std::upper_bound(tau.begin() + 1, tau.end(), t);
    std::size_t n = static_cast<std::size_t>(it - tau.begin()) - 1;
    n = std::clamp<std::size_t>(n, 1, n_max - 1);
    const double span = tau[n + 1] - tau[n];
    const double lam = span > 0.0 ? std::clamp((t - tau[n]) / span, 0.0, 1.0) : 0.0;
    return (1.0 - lam) * eta_of(n) + lam * eta_of(n + 1);
  };

  AptReport rep;
  for (double t : t_grid) {
    if (t < 0.0 || t + T > tau_end)
      throw HorizonError("apt_check: window [" + std::to_string(t) + ", " +
                         std::to_string(t + T) + "] runs past the trace (tau_end=" +
                         std::to_string(tau_end) + ")");
    const Eigen::VectorXd base = eta_tilde(t);
    double sup = 0.0;
    for (int i = 0; i < s_points; ++i) {
      const double s = T * i / (s_points - 1);
      const Eigen::VectorXd flow = detail::normalized_exp_flow_cached(A, eigA, base, s);
      sup = std::max(sup, tv_distance(eta_tilde(t + s), flow));
    }
    rep.window_start.push_back(t);
    rep.sup_tv.push_back(sup);

    const auto lo = std::upper_bound(tau.begin() + 1, tau.end(), t);
    const auto hi = std::upper_bound(tau.begin() + 1, tau.end(), t + T);
    for (auto it = lo; it != hi && it + 1 != tau.end(); ++it)
      rep.max_gamma_in_range = std::max(rep.max_gamma_in_range, *(it + 1) - *it);
  }
  return rep;
}

AptReport apt_check(const ChainTrace& trace, const AbsorbingChain& chain, double T,
                    const std::vector<double>& t_grid, int s_points) {
  const std::size_t n_max = trace.n_cycles();
  if (n_max < 2) throw PreconditionError("apt_check: trace too short");
  const int ns = trace.n_states;
  // Prefix counts of the resampling points; row n is eta_n.
  Eigen::MatrixXd prefix(n_max + 1, ns);
  prefix.row(0).setZero();
  for (std::size_t i = 0; i < n_max; ++i) {
    prefix.row(i + 1) = prefix.row(i);
    prefix(i + 1, trace.resample_states[i]) += 1.0;
  }
  auto eta_of = [&prefix](std::size_t n) -> Eigen::VectorXd {
    return prefix.row(n).transpose() / static_cast<double>(n);
  };
  return apt_check_measures(eta_of, n_max, chain, T, t_grid, s_points);
}

}  // namespace qsd

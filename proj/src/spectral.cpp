#include "qsd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "qsd/errors.hpp"
#include "spectral_detail.hpp"

namespace qsd {

namespace detail {

ComplexEig complex_eig(const Eigen::MatrixXd& M, double cond_limit) {
  ComplexEig out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) return out;
  out.w = es.eigenvalues();
  out.V = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.V);
  if (!lu.isInvertible()) return out;
  out.Vinv = lu.inverse();
  const double nv = out.V.cwiseAbs().rowwise().sum().maxCoeff();
  const double ni = out.Vinv.cwiseAbs().rowwise().sum().maxCoeff();
  out.cond = nv * ni;
  out.usable = std::isfinite(out.cond) && out.cond <= cond_limit;
  return out;
}

}  // namespace detail

namespace {

// Smallest and second-smallest real parts of the spectrum of -Q.
std::pair<double, double> bottom_two_rates(const Eigen::VectorXcd& w) {
  std::vector<double> re(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) re[i] = -w[i].real();
  std::sort(re.begin(), re.end());
  return {re[0], re.size() > 1 ? re[1] : std::numeric_limits<double>::infinity()};
}

struct PrincipalPair {
  double lambda0 = 0.0;
  Eigen::VectorXd alpha;  // left, probability-normalized
  Eigen::VectorXd eta;    // right, alpha.eta = 1
};

// Inverse iteration with (-Q)^{-1}; converges to the Perron pair for
// irreducible chains from any positive start.
PrincipalPair principal_pair(const AbsorbingChain& chain) {
  const int n = chain.n();
  const Eigen::MatrixXd negQ = -chain.Q();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(negQ);
  Eigen::PartialPivLU<Eigen::MatrixXd> luT(negQ.transpose());

  PrincipalPair out;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd next = luT.solve(v);
    const double s = next.sum();
    if (!(s > 0.0) || !next.allFinite())
      throw NumericalError("principal eigenvector iteration diverged");
    lambda = 1.0 / s;
    next /= s;
    const double delta = (next - v).lpNorm<1>();
    v = std::move(next);
    if (delta <= 1e-15) break;
  }
  out.lambda0 = lambda;
  out.alpha = v;

  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd next = lu.solve(u);
    const double s = next.lpNorm<1>();
    if (!(s > 0.0) || !next.allFinite())
      throw NumericalError("survival eigenvector iteration diverged");
    next /= s;
    const double delta = (next - u).lpNorm<1>();
    u = std::move(next);
    if (delta <= 1e-15) break;
  }
  const double scale = out.alpha.dot(u);
  if (!(scale > 0.0)) throw NumericalError("alpha.eta normalization failed");
  out.eta = u / scale;

  const double qscale = std::max(1.0, chain.Q().cwiseAbs().maxCoeff());
  const double res_a = (out.alpha.transpose() * chain.Q() +
                        out.lambda0 * out.alpha.transpose())
                           .cwiseAbs()
                           .maxCoeff();
  const double res_e =
      (chain.Q() * out.eta + out.lambda0 * out.eta).cwiseAbs().maxCoeff() /
      std::max(1.0, out.eta.cwiseAbs().maxCoeff());
  if (res_a > 1e-10 * qscale || res_e > 1e-10 * qscale)
    throw NumericalError("top eigenvalue appears defective (residual too large)");
  return out;
}

// Envelope slope of log(distance) over a window, skipping values at or below
// the floor. Window bounds are indices into xs; 0,0 means last half. The line
// is fitted through the vertices of the upper convex hull of the log points:
// complex subdominant eigenvalue pairs modulate the decay by |cos(n phi)|,
// and a plain least-squares line through the dips tilts with the phase while
// the hull tracks the envelope. On log-linear data the hull fit reduces to
// the chord, i.e. the exact slope.
struct SlopeFit {
  double slope = 0.0;
  std::size_t lo = 0, hi = 0;
  bool reduced = false;
  bool all_below_floor = false;
  bool enough_points = false;
};

SlopeFit fit_log_slope(const std::vector<double>& xs, const std::vector<double>& ds,
                       std::size_t lo, std::size_t hi, double floor) {
  SlopeFit fit;
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds[i] > floor) valid.push_back(i);
  if (valid.empty()) {
    fit.all_below_floor = true;
    return fit;
  }
  if (hi == 0 || hi >= xs.size()) hi = xs.size() - 1;
  if (lo == 0) lo = hi / 2;
  std::vector<std::size_t> window;
  for (std::size_t i : valid)
    if (i >= lo && i <= hi) window.push_back(i);
  if (window.size() < 3) {
    // Underflow before the requested window: fit over the last half of what
    // remains above the floor.
    fit.reduced = true;
    window.assign(valid.begin() + valid.size() / 2, valid.end());
    if (window.size() < 3) window = valid;
  }
  if (window.size() < 2) return fit;

  std::vector<std::size_t> hull;
  for (const std::size_t i : window) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      const double cross = (xs[b] - xs[a]) * (std::log(ds[i]) - std::log(ds[a])) -
                           (std::log(ds[b]) - std::log(ds[a])) * (xs[i] - xs[a]);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i : hull) {
    const double x = xs[i], y = std::log(ds[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(hull.size());
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.lo = window.front();
  fit.hi = window.back();
  fit.enough_points = true;
  return fit;
}

}  // namespace

SpectralData spectral(const AbsorbingChain& chain) {
  if (!chain.irreducible())
    throw ReducibleChainError("chain is reducible; the QSD may not be unique");
  SpectralData out;
  if (chain.n() == 1) {
    out.lambda0 = -chain.Q()(0, 0);
    out.alpha = Eigen::VectorXd::Ones(1);
    out.eta = Eigen::VectorXd::Ones(1);
    out.gamma = std::numeric_limits<double>::infinity();
    return out;
  }
  const PrincipalPair pp = principal_pair(chain);
  out.lambda0 = pp.lambda0;
  out.alpha = pp.alpha;
  out.eta = pp.eta;

  Eigen::EigenSolver<Eigen::MatrixXd> es(chain.Q(), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  const auto [l0, l1] = bottom_two_rates(es.eigenvalues());
  out.gamma = l1 - out.lambda0;
  const double qscale = std::max(1.0, chain.Q().cwiseAbs().maxCoeff());
  if (!(out.gamma > 1e-12 * qscale))
    throw NumericalError("top eigenvalue not simple: spectral gap is not positive");
  (void)l0;
  return out;
}

Eigen::MatrixXd green(const AbsorbingChain& chain) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(-chain.Q());
  if (!lu.isInvertible())
    throw NoAbsorptionError("-Q is singular: absorption is not reachable from every state");
  return lu.inverse();
}

Eigen::MatrixXd semigroup(const AbsorbingChain& chain, double t) {
  if (t < 0.0) throw ParameterError("semigroup: t must be nonnegative");
  const int n = chain.n();
  if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd P;
  const auto eig = detail::complex_eig(chain.Q());
  if (eig.usable) {
    Eigen::MatrixXcd E = eig.V * (t * eig.w.array()).exp().matrix().asDiagonal() * eig.Vinv;
    P = E.real();
  } else {
    P = (t * chain.Q()).exp();
  }
  if ((P.array() < -1e-8).any() || (P.array() > 1.0 + 1e-8).any())
    throw NumericalError("semigroup entries escaped [0,1]");
  P = P.cwiseMax(0.0).cwiseMin(1.0);
  return P;
}

Eigen::VectorXd conditional_law(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                double t) {
  if (std::abs(mu.sum() - 1.0) > 1e-9)
    throw ParameterError("conditional_law: mu must sum to 1");
  const Eigen::MatrixXd P = semigroup(chain, t);
  Eigen::VectorXd v = P.transpose() * mu;
  const double survival = v.sum();
  if (survival < 1e-300)
    throw HorizonError("survival underflow at t=" + std::to_string(t));
  return v / survival;
}

A1A2Result check_A1_A2(const AbsorbingChain& chain, double t0) {
  if (t0 <= 0.0) throw ParameterError("check_A1_A2: t0 must be positive");
  const int n = chain.n();
  A1A2Result res;

  const Eigen::MatrixXd P0 = semigroup(chain, t0);
  const Eigen::VectorXd surv0 = P0.rowwise().sum();
  if ((surv0.array() <= 0.0).any()) {
    res.note = "no survival from some state at t0";
    return res;
  }
  Eigen::VectorXd colmin = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::min(m, P0(i, j) / surv0(i));
    colmin(j) = m;
  }
  res.c1 = colmin.sum();
  if (!(res.c1 > 0.0)) {
    res.note = "conditioned kernel is not minorized at t0";
    return res;
  }
  res.nu = colmin / res.c1;

  // Survival comparison on a time grid, with the spectral tail limit
  // min_x nu(kappa)/kappa(x) appended when the decomposition is trustworthy.
  const auto eig = detail::complex_eig(chain.Q());
  double lambda0_proxy = 0.0;
  for (Eigen::Index i = 0; i < eig.w.size(); ++i)
    lambda0_proxy = std::max(lambda0_proxy, eig.w[i].real());
  lambda0_proxy = -lambda0_proxy;
  if (!(lambda0_proxy > 0.0)) lambda0_proxy = chain.absorb_rate().maxCoeff();

  const double t_max = std::max(3.0 * t0, 40.0 / lambda0_proxy);
  const int grid_points = 81;
  double c2 = std::numeric_limits<double>::infinity();
  for (int g = 0; g < grid_points; ++g) {
    const double t = t_max * g / (grid_points - 1);
    const Eigen::MatrixXd P = semigroup(chain, t);
    const Eigen::VectorXd surv = P.rowwise().sum();
    const double nu_surv = res.nu.dot(surv);
    for (int i = 0; i < n; ++i)
      if (surv(i) > 0.0) c2 = std::min(c2, nu_surv / surv(i));
  }
  if (eig.usable) {
    // kappa_x = lim e^{lambda0 t} P_x(t < tau): the principal projection.
    Eigen::Index p = 0;
    for (Eigen::Index i = 1; i < eig.w.size(); ++i)
      if (eig.w[i].real() > eig.w[p].real()) p = i;
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(n);
    const Eigen::VectorXcd kappa_c = eig.V.col(p) * (eig.Vinv.row(p) * ones);
    Eigen::VectorXd kappa = kappa_c.real();
    if (kappa.minCoeff() < 0 && kappa.maxCoeff() <= 0) kappa = -kappa;
    if (kappa.minCoeff() > 0.0) {
      const double nu_k = res.nu.dot(kappa);
      double tail = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) tail = std::min(tail, nu_k / kappa(i));
      c2 = std::min(c2, tail);
      res.note = "tail from spectral limit";
    }
  } else {
    // Double the horizon a few times by squaring the transition kernel.
    Eigen::MatrixXd P = semigroup(chain, t_max);
    for (int k = 0; k < 6; ++k) {
      P = P * P;
      const Eigen::VectorXd surv = P.rowwise().sum();
      const double nu_surv = res.nu.dot(surv);
      for (int i = 0; i < n; ++i)
        if (surv(i) > 0.0) c2 = std::min(c2, nu_surv / surv(i));
    }
    res.note = "tail from kernel squaring";
  }
  res.c2 = std::min(1.0, c2);
  res.ok = res.c1 > 0.0 && res.c2 > 0.0;
  return res;
}

Eigen::VectorXd normalized_exp_flow(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                    double t) {
  const Eigen::MatrixXd A = green(chain);
  const auto eigA = detail::complex_eig(A);
  return detail::normalized_exp_flow_cached(A, eigA, mu, t);
}

namespace detail {

Eigen::VectorXd normalized_exp_flow_cached(const Eigen::MatrixXd& A, const ComplexEig& eigA,
                                           const Eigen::VectorXd& mu, double t) {
  Eigen::VectorXd v;
  if (eigA.usable) {
    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eigA.w.size(); ++i)
      shift = std::max(shift, eigA.w[i].real());
    const Eigen::RowVectorXcd c = mu.transpose().cast<std::complex<double>>() * eigA.V;
    Eigen::RowVectorXcd scaled(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i)
      scaled(i) = c(i) * std::exp(t * (eigA.w[i] - shift));
    v = (scaled * eigA.Vinv).real().transpose();
  } else {
    const double shift = A.trace() / A.rows() + A.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::MatrixXd E =
        (t * (A - shift * Eigen::MatrixXd::Identity(A.rows(), A.cols()))).exp();
    v = E.transpose() * mu;
  }
  v = v.cwiseMax(0.0);
  const double s = v.sum();
  if (!(s > 0.0) || !v.allFinite())
    throw NumericalError("normalized exp flow lost positivity");
  return v / s;
}

}  // namespace detail

DecayReport verify_powers_bound(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                int n_max, int fit_lo, int fit_hi, double floor) {
  if (n_max < 5) throw ParameterError("verify_powers_bound: n_max must be >= 5");
  const SpectralData sd = spectral(chain);
  DecayReport rep;
  rep.bound_slope = std::isinf(sd.gamma)
                        ? -std::numeric_limits<double>::infinity()
                        : std::log(sd.lambda0 / (sd.lambda0 + sd.gamma));
  Eigen::PartialPivLU<Eigen::MatrixXd> luT((-chain.Q()).transpose());
  // Iterate the deviation delta_n = mu A^n / mu A^n 1 - alpha instead of the
  // normalized measure itself: the update
  //   delta' = lambda0 (delta A - (delta A 1) alpha) / (1 + lambda0 delta A 1)
  // never subtracts two O(1) vectors, so the distances stay relatively
  // accurate far below the double cancellation floor.
  Eigen::VectorXd delta = mu - sd.alpha;
  for (int n = 1; n <= n_max; ++n) {
    const Eigen::VectorXd w = luT.solve(delta);
    const double s = w.sum();
    delta = sd.lambda0 * (w - s * sd.alpha) / (1.0 + sd.lambda0 * s);
    delta -= delta.sum() * sd.alpha;  // keep the zero-sum hyperplane
    rep.xs.push_back(n);
    rep.distances.push_back(0.5 * delta.lpNorm<1>());
  }
  const SlopeFit fit =
      fit_log_slope(rep.xs, rep.distances, fit_lo > 0 ? static_cast<std::size_t>(fit_lo - 1) : 0,
                    fit_hi > 0 ? static_cast<std::size_t>(fit_hi - 1) : 0, floor);
  rep.fitted_slope = fit.slope;
  rep.fit_lo = fit.lo;
  rep.fit_hi = fit.hi;
  rep.reduced_window = fit.reduced;
  rep.all_below_floor = fit.all_below_floor;
  rep.pass = fit.all_below_floor ||
             (fit.enough_points && rep.fitted_slope <= rep.bound_slope + 0.01);
  return rep;
}

DecayReport verify_exp_flow_bound(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                  std::vector<double> t_grid, double floor) {
  const SpectralData sd = spectral(chain);
  DecayReport rep;
  const double rate = std::isinf(sd.gamma)
                          ? std::numeric_limits<double>::infinity()
                          : sd.gamma / (sd.lambda0 * (sd.lambda0 + sd.gamma));
  rep.bound_slope = -rate;

  // Deviation representation through the left eigenvectors of Q: writing
  // mu e^{tA} = e^{t/lambda0} c1 [u1 + sum beta_i(t) u_i], the normalized flow
  // minus alpha is  sum beta_i w_i / (u1.1 + sum beta_i u_i.1)  with
  // w_i = u_i - (u_i.1) alpha. No principal-part cancellation, so the
  // distances stay relatively accurate at depths far below 1e-16.
  const auto eigT = detail::complex_eig(chain.Q().transpose());
  const bool deviation_route = eigT.usable && chain.n() > 1;

  if (t_grid.empty()) {
    const double depth = deviation_route ? 600.0 : 27.0;
    const double t_max = std::isinf(rate) ? 1.0 : depth / rate;
    for (int i = 0; i <= 24; ++i) t_grid.push_back(t_max * i / 24.0);
  }
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() < 0.0)
    throw ParameterError("verify_exp_flow_bound: t_grid must be increasing and nonnegative");

  if (deviation_route) {
    const int n = chain.n();
    Eigen::Index p = 0;
    for (Eigen::Index i = 1; i < eigT.w.size(); ++i)
      if (eigT.w[i].real() > eigT.w[p].real()) p = i;
    // mu = sum_i c_i u_i with u_i the rows of V^T; c = V^{-1} mu.
    const Eigen::VectorXcd c = eigT.Vinv * mu.cast<std::complex<double>>();
    const std::complex<double> c1 = c(p);
    if (std::abs(c1) < 1e-14)
      throw NumericalError("verify_exp_flow_bound: mu has no principal component");
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(n);
    const std::complex<double> u1_sum = eigT.V.col(p).sum();
    const Eigen::VectorXcd alpha_c = sd.alpha.cast<std::complex<double>>();
    for (double t : t_grid) {
      Eigen::VectorXcd num = Eigen::VectorXcd::Zero(n);
      std::complex<double> den = u1_sum;
      for (Eigen::Index i = 0; i < eigT.w.size(); ++i) {
        if (i == p) continue;
        // exponent Re(1/lambda_i) - 1/lambda0 < 0
        const std::complex<double> eps = 1.0 / eigT.w[p] - 1.0 / eigT.w[i];
        const std::complex<double> beta = (c(i) / c1) * std::exp(t * eps);
        const Eigen::VectorXcd ui = eigT.V.col(i);
        const std::complex<double> ui_sum = ui.sum();
        num += beta * (ui - ui_sum * alpha_c);
        den += beta * ui_sum;
      }
      rep.xs.push_back(t);
      rep.distances.push_back(0.5 * (num / den).real().lpNorm<1>());
    }
  } else {
    const Eigen::MatrixXd A = green(chain);
    const auto eigA = detail::complex_eig(A);
    for (double t : t_grid) {
      rep.xs.push_back(t);
      rep.distances.push_back(
          tv_distance(detail::normalized_exp_flow_cached(A, eigA, mu, t), sd.alpha));
    }
    floor = std::max(floor, 1e-13);  // additive cancellation route
  }

  const SlopeFit fit = fit_log_slope(rep.xs, rep.distances, 0, 0, floor);
  rep.fitted_slope = fit.slope;
  rep.fit_lo = fit.lo;
  rep.fit_hi = fit.hi;
  rep.reduced_window = fit.reduced;
  rep.all_below_floor = fit.all_below_floor;
  rep.pass = fit.all_below_floor ||
             (fit.enough_points && rep.fitted_slope <= rep.bound_slope + 0.01);
  return rep;
}

}  // namespace qsd

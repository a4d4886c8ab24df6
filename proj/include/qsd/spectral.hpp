#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsd/chain.hpp"

namespace qsd {

// (lambda0, alpha, eta, gamma): absorption rate, QSD, survival eigenfunction,
// spectral gap. alpha Q = -lambda0 alpha, Q eta = -lambda0 eta, alpha.eta = 1.
struct SpectralData {
  double lambda0 = 0.0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd eta;
  double gamma = 0.0;  // +inf for a single state
};

// Eigen-decomposition of Q with the principal pair polished by inverse
// iteration. Throws ReducibleChainError / NumericalError.
SpectralData spectral(const AbsorbingChain& chain);

// Green operator A = (-Q)^{-1}. Throws NoAbsorptionError when -Q is singular.
Eigen::MatrixXd green(const AbsorbingChain& chain);

// P_t = exp(tQ), entries in [0,1], row sums in [0,1].
Eigen::MatrixXd semigroup(const AbsorbingChain& chain, double t);

// mu P_t / (mu P_t 1). Throws HorizonError when the survival underflows.
Eigen::VectorXd conditional_law(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                double t);

struct A1A2Result {
  bool ok = false;       // c1 > 0 found at t0
  double c1 = 0.0;       // minorization constant of the conditioned kernel
  Eigen::VectorXd nu;    // minorizing probability vector
  double c2 = 0.0;       // survival-comparison constant
  std::string note;
};

// Empirical check of the minorization (A1) and survival-domination (A2)
// conditions. A failure to mix at t0 is reported, not thrown.
A1A2Result check_A1_A2(const AbsorbingChain& chain, double t0);

// mu A^n f by repeated solves against -Q, cross-checked against the
// quadrature of u^{n-1}/(n-1)! mu P_u f du; disagreement beyond 1e-6
// relative throws NumericalError.
double green_power(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                   const Eigen::VectorXd& f, int n);

struct GreenPowerValues {
  double matrix_value = 0.0;
  double quadrature_value = 0.0;
};
GreenPowerValues green_power_values(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& f, int n);

// Geometric/exponential decay report for the normalized power and flow maps.
struct DecayReport {
  std::vector<double> xs;         // n or t
  std::vector<double> distances;  // TV to alpha
  double fitted_slope = 0.0;      // least-squares slope of log distance
  double bound_slope = 0.0;       // log(lambda0/(lambda0+gamma)) or flow analog
  bool pass = false;              // fitted_slope <= bound_slope + 0.01
  std::size_t fit_lo = 0, fit_hi = 0;  // window actually used (indices into xs)
  bool reduced_window = false;    // true when underflow shrank the window
  bool all_below_floor = false;   // every distance under the noise floor
};

// TV(mu A^n / mu A^n 1, alpha) for n = 1..n_max; slope fitted over
// [fit_lo, fit_hi] (1-based n values; 0 means the last half). Distances at or
// below `floor` are excluded from the fit. Computed through a deflated
// recurrence on the deviation from alpha, so the default floor only guards
// true underflow.
DecayReport verify_powers_bound(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                int n_max, int fit_lo = 0, int fit_hi = 0,
                                double floor = 1e-250);

// Same for the normalized e^{tA} flow on t_grid. Empty grid: a default grid
// scaled to the predicted decay rate. Distances come from a deviation
// expansion in the left eigenbasis when the decomposition is trustworthy
// (floor then only guards underflow); the fallback route floors at 1e-13.
DecayReport verify_exp_flow_bound(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                  std::vector<double> t_grid = {}, double floor = 1e-250);

// Normalized mu e^{tA} / mu e^{tA} 1, computed through A's eigen-decomposition
// with a conditioning check (spectral shift keeps large t finite).
Eigen::VectorXd normalized_exp_flow(const AbsorbingChain& chain, const Eigen::VectorXd& mu,
                                    double t);

}  // namespace qsd

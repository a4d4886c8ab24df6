#pragma once

#include <Eigen/Dense>

namespace qsd::detail {

// Complex eigen-decomposition with a crude 1-norm condition estimate; usable
// when cond <= cond_limit (default 1e8), else callers fall back to
// scaling-and-squaring matrix exponentials.
struct ComplexEig {
  Eigen::MatrixXcd V, Vinv;
  Eigen::VectorXcd w;
  double cond = 0.0;
  bool usable = false;
};

ComplexEig complex_eig(const Eigen::MatrixXd& M, double cond_limit = 1e8);

// mu e^{tA} / mu e^{tA} 1 with the top eigenvalue shifted out, so large t
// stays finite.
Eigen::VectorXd normalized_exp_flow_cached(const Eigen::MatrixXd& A, const ComplexEig& eigA,
                                           const Eigen::VectorXd& mu, double t);

}  // namespace qsd::detail

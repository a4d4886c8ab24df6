#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qsd/chain.hpp"

namespace qsd {

// Right-hand side of the measure flow: F(nu) = nu A - (nu A 1) nu.
Eigen::VectorXd flow_rhs(const Eigen::MatrixXd& A, const Eigen::VectorXd& nu);

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> tv_vs_closed_form;  // against nu e^{tA}/nu e^{tA} 1
  double max_tv = 0.0;
};

// Integrates d phi/dt = F(phi) from nu over [0, T] with an adaptive embedded
// Runge-Kutta (Cash-Karp 4/5) at local tolerance tol, recording n_out states
// and their TV discrepancy to the closed form. Throws StiffnessError on step
// underflow.
FlowTrajectory flow_ode(const AbsorbingChain& chain, const Eigen::VectorXd& nu, double T,
                        double tol, int n_out = 101);

}  // namespace qsd

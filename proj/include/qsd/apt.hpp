#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qsd/chain.hpp"
#include "qsd/chain_reinforced.hpp"

namespace qsd {

struct AptReport {
  std::vector<double> window_start;  // t on the tau clock
  std::vector<double> sup_tv;        // sup_{s<=T} TV(eta~_{t+s}, flow from eta~_t)
  double max_gamma_in_range = 0.0;   // largest step size touched by any window
};

// Asymptotic-pseudo-trajectory check: compares the time-changed, linearly
// interpolated eta_n against the normalized e^{sA} flow restarted at each
// window. eta_of(n) must return the empirical measure eta_n for 1 <= n <=
// n_max. Throws HorizonError when a window runs past the trace.
AptReport apt_check_measures(const std::function<Eigen::VectorXd(std::size_t)>& eta_of,
                             std::size_t n_max, const AbsorbingChain& chain, double T,
                             const std::vector<double>& t_grid, int s_points = 64);

AptReport apt_check(const ChainTrace& trace, const AbsorbingChain& chain, double T,
                    const std::vector<double>& t_grid, int s_points = 64);

// tau_n = gamma_2 + ... + gamma_n with gamma_{n+1} = 1/((n+1) eta_n A 1).
std::vector<double> apt_time_change(const std::function<Eigen::VectorXd(std::size_t)>& eta_of,
                                    std::size_t n_max, const AbsorbingChain& chain);

}  // namespace qsd

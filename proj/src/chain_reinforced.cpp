#include "qsd/chain_reinforced.hpp"

#include <algorithm>
#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

double ChainTrace::lambda0_estimate() const {
  if (theta.empty()) throw PreconditionError("lambda0_estimate: empty trace");
  return static_cast<double>(theta.size()) / theta.back();
}

Eigen::VectorXd ChainTrace::eta_counts() const {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_states);
  for (int z : resample_states) counts(z) += 1.0;
  return counts / static_cast<double>(resample_states.size());
}

ChainTrace reinforced_chain(const AbsorbingChain& chain, std::size_t n_cycles, RngStream& rng,
                            int start_state, std::size_t snapshot_base) {
  if (n_cycles < 1) throw ParameterError("reinforced_chain: n_cycles must be >= 1");
  const int n = chain.n();
  if (start_state < 0 || start_state >= n)
    throw ParameterError("reinforced_chain: start_state out of range");
  const Eigen::MatrixXd& Q = chain.Q();

  ChainTrace trace;
  trace.n_states = n;
  trace.theta.reserve(n_cycles);
  trace.resample_states.reserve(n_cycles);
  trace.occupation_time = Eigen::VectorXd::Zero(n);

  std::vector<double> prefix(n);
  int state = start_state;
  double theta = 0.0;
  std::size_t next_snapshot = 1;
  const std::size_t base = std::max<std::size_t>(2, snapshot_base);

  for (std::size_t k = 0; k < n_cycles; ++k) {
    // One exact path: exponential holding times, categorical jumps, the
    // remaining rate mass is absorption.
    while (true) {
      const double rate = -Q(state, state);
      const double hold = -std::log1p(-rng.uniform()) / rate;
      trace.occupation_time(state) += hold;
      theta += hold;
      double r = rng.uniform() * rate;
      int next = -1;
      for (int j = 0; j < n; ++j) {
        if (j == state) continue;
        r -= Q(state, j);
        if (r < 0.0) {
          next = j;
          break;
        }
      }
      if (next < 0) break;  // absorbed
      state = next;
    }
    trace.theta.push_back(theta);

    double c = 0.0;
    for (int j = 0; j < n; ++j) {
      c += trace.occupation_time(j);
      prefix[j] = c;
    }
    const double u = rng.uniform() * theta;
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
    state = static_cast<int>(std::min<std::ptrdiff_t>(it - prefix.begin(),
                                                      static_cast<std::ptrdiff_t>(n) - 1));
    trace.resample_states.push_back(state);

    const std::size_t cycle = k + 1;
    if (cycle == next_snapshot || cycle == n_cycles) {
      trace.snapshots.push_back(
          {cycle, theta, Eigen::VectorXd(trace.occupation_time / theta)});
      while (next_snapshot <= cycle) next_snapshot *= base;
    }
  }
  return trace;
}

}  // namespace qsd

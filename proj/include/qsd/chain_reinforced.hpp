#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qsd/chain.hpp"
#include "qsd/rng.hpp"

namespace qsd {

struct ChainSnapshot {
  std::size_t cycle = 0;
  double theta = 0.0;
  Eigen::VectorXd occupation;  // normalized copy
};

// Discrete-state reinforced trace: exact holding times, no discretization.
struct ChainTrace {
  int n_states = 0;
  std::vector<double> theta;
  std::vector<int> resample_states;  // Z_1..Z_n
  Eigen::VectorXd occupation_time;   // total time per state; sums to theta_n
  std::vector<ChainSnapshot> snapshots;

  std::size_t n_cycles() const { return theta.size(); }
  double lambda0_estimate() const;
  Eigen::VectorXd eta_counts() const;  // empirical measure of Z_1..Z_n
};

// Exact continuous-time simulation (exponential holding times, categorical
// jumps) of the diffuse/absorb/resample loop on a finite chain.
ChainTrace reinforced_chain(const AbsorbingChain& chain, std::size_t n_cycles, RngStream& rng,
                            int start_state = 0, std::size_t snapshot_base = 2);

}  // namespace qsd

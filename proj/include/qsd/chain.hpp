#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "qsd/rng.hpp"

namespace qsd {

// Finite-state sub-generator on the transient states. Off-diagonal entries
// are jump rates, row deficits are absorption rates.
class AbsorbingChain {
 public:
  // Validates the sign pattern and that absorption is possible somewhere.
  explicit AbsorbingChain(Eigen::MatrixXd Q);

  int n() const { return static_cast<int>(Q_.rows()); }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::VectorXd& absorb_rate() const { return absorb_; }
  bool irreducible() const { return irreducible_; }

  // File format: comment lines start with '#'; first data line is
  // "n_states <n>", followed by n rows of n entries of Q.
  static AbsorbingChain load(std::istream& in);
  static AbsorbingChain load_file(const std::string& path);

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd absorb_;
  bool irreducible_ = false;
};

// Off-diagonal rates U[0,1], absorption rates U[0.1,1]; redrawn until
// irreducible (immediate for dense draws).
AbsorbingChain random_chain(int n_states, RngStream& rng);

// Half the l1 distance between two vectors (finite-state total variation).
double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace qsd

#include "qsd/chain.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

// Strong connectivity of the positive off-diagonal pattern: forward and
// backward reachability from state 0.
bool strongly_connected(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  if (n <= 1) return true;
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j) {
        const double q = transpose ? Q(j, i) : Q(i, j);
        if (i != j && q > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    for (char s : seen)
      if (!s) return false;
    return true;
  };
  return reach(false) && reach(true);
}

}  // namespace

AbsorbingChain::AbsorbingChain(Eigen::MatrixXd Q) : Q_(std::move(Q)) {
  const auto n = Q_.rows();
  if (n < 1 || Q_.cols() != n) throw ChainFormatError("Q must be square and non-empty");
  const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && Q_(i, j) < -1e-12 * scale)
        throw ChainFormatError("negative off-diagonal rate at (" + std::to_string(i) + "," +
                               std::to_string(j) + ")");
    }
    if (Q_.row(i).sum() > 1e-12 * scale)
      throw ChainFormatError("row " + std::to_string(i) + " has positive sum");
  }
  absorb_ = -Q_.rowwise().sum();
  absorb_ = absorb_.cwiseMax(0.0);
  if (absorb_.maxCoeff() <= 0.0)
    throw ChainFormatError("chain has no absorption (all row sums are zero)");
  irreducible_ = strongly_connected(Q_);
}

AbsorbingChain AbsorbingChain::load(std::istream& in) {
  std::string line;
  int lineno = 0;
  int n = -1;
  std::vector<double> entries;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (n < 0) {
      std::string tag;
      if (!(ls >> tag)) continue;  // blank line
      if (tag != "n_states")
        throw ChainFormatError("line " + std::to_string(lineno) +
                               ": expected \"n_states <n>\", got \"" + tag + "\"");
      if (!(ls >> n) || n < 1)
        throw ChainFormatError("line " + std::to_string(lineno) + ": bad state count");
      continue;
    }
    double v;
    while (ls >> v) entries.push_back(v);
    if (!ls.eof())
      throw ChainFormatError("line " + std::to_string(lineno) + ": non-numeric entry");
  }
  if (n < 0) throw ChainFormatError("missing \"n_states\" line");
  if (entries.size() != static_cast<std::size_t>(n) * n)
    throw ChainFormatError("expected " + std::to_string(n * n) + " matrix entries, got " +
                           std::to_string(entries.size()));
  Eigen::MatrixXd Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q(i, j) = entries[static_cast<std::size_t>(i) * n + j];
  return AbsorbingChain(Q);
}

AbsorbingChain AbsorbingChain::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open chain file " + path);
  return load(in);
}

AbsorbingChain random_chain(int n_states, RngStream& rng) {
  if (n_states < 1) throw ParameterError("random_chain: n_states must be >= 1");
  while (true) {
    Eigen::MatrixXd Q(n_states, n_states);
    for (int i = 0; i < n_states; ++i) {
      double row = 0.0;
      for (int j = 0; j < n_states; ++j) {
        if (i == j) continue;
        Q(i, j) = rng.uniform();
        row += Q(i, j);
      }
      const double absorb = 0.1 + 0.9 * rng.uniform();
      Q(i, i) = -(row + absorb);
    }
    AbsorbingChain chain(std::move(Q));
    if (chain.irreducible()) return chain;
  }
}

double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 0.5 * (a - b).lpNorm<1>();
}

}  // namespace qsd

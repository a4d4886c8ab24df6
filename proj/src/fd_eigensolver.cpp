#include "qsd/fd_eigensolver.hpp"

#include <cmath>

#include "qsd/errors.hpp"
#include "qsd/spectral.hpp"

namespace qsd {

AbsorbingChain fd_interval_chain(const std::function<double(double)>& drift,
                                 const std::function<double(double)>& diffusion_scalar,
                                 double a, double b, int grid_size) {
  if (grid_size < 16) throw ParameterError("fd_eigensolver: grid_size must be >= 16");
  if (b <= a) throw ParameterError("fd_eigensolver: empty interval");
  const int n = grid_size - 1;  // interior nodes
  const double h = (b - a) / grid_size;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = a + (i + 1) * h;
    const double s = diffusion_scalar(x);
    const double D = 0.5 * s * s;
    const double bd = drift(x);
    const double right = D / (h * h) + bd / (2.0 * h);
    const double left = D / (h * h) - bd / (2.0 * h);
    if (right < 0.0 || left < 0.0)
      throw ModelEvalError("fd_eigensolver: non-elliptic rates on the grid at x=" +
                           std::to_string(x) + " (refine the grid or reduce the drift)");
    if (i + 1 < n) Q(i, i + 1) = right;
    if (i > 0) Q(i, i - 1) = left;
    Q(i, i) = -(right + left);
  }
  return AbsorbingChain(std::move(Q));
}

AbsorbingChain fd_disk_radial_chain(int grid_size) {
  if (grid_size < 16) throw ParameterError("fd_eigensolver: grid_size must be >= 16");
  const int n = grid_size;
  const double h = 1.0 / grid_size;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  // Finite-volume form of (1/(2r)) d/dr (r d/dr) on cells [ih, (i+1)h] with
  // centers r_i = (i+1/2)h. The face flux at r=0 vanishes (natural
  // reflection); the last cell sees the Dirichlet face at r=1 a half cell
  // away, which keeps the boundary where it belongs.
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * h;
    const double face_r = (i + 1) * h;
    const double face_l = i * h;
    const double right = (i + 1 < n) ? face_r / (2.0 * r * h * h)
                                     : face_r / (r * h * h);  // half-cell Dirichlet flux
    const double left = face_l / (2.0 * r * h * h);
    if (i + 1 < n) Q(i, i + 1) = right;
    if (i > 0) Q(i, i - 1) = left;
    Q(i, i) = -(right + left);
  }
  return AbsorbingChain(std::move(Q));
}

namespace {

FdResult from_chain(const AbsorbingChain& chain, double origin, double h) {
  const SpectralData sd = spectral(chain);
  FdResult out;
  out.lambda0 = sd.lambda0;
  out.nodes.resize(chain.n());
  out.density.resize(chain.n());
  for (int i = 0; i < chain.n(); ++i) {
    out.nodes[i] = origin + i * h;
    out.density[i] = sd.alpha(i) / h;
  }
  return out;
}

}  // namespace

FdResult fd_interval_qsd(const std::function<double(double)>& drift,
                         const std::function<double(double)>& diffusion_scalar, double a,
                         double b, int grid_size) {
  const double h = (b - a) / grid_size;
  return from_chain(fd_interval_chain(drift, diffusion_scalar, a, b, grid_size), a + h, h);
}

FdResult fd_disk_radial_qsd(int grid_size) {
  const double h = 1.0 / grid_size;
  return from_chain(fd_disk_radial_chain(grid_size), 0.5 * h, h);
}

FdResult fd_eigensolver(const std::string& model_name, int grid_size,
                        const ModelParams& params) {
  if (model_name == "bm-interval")
    return fd_interval_qsd([](double) { return 0.0; }, [](double) { return 1.0; }, 0.0, 1.0,
                           grid_size);
  if (model_name == "drifted-interval")
    return fd_interval_qsd([c = params.drift_c](double) { return c; },
                           [](double) { return 1.0; }, 0.0, 1.0, grid_size);
  if (model_name == "custom-polynomial") {
    auto poly = [](const std::vector<double>& coeffs) {
      return [coeffs](double x) {
        double v = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
        return v;
      };
    };
    auto diff = params.diffusion_coeffs.empty() ? std::vector<double>{1.0}
                                                : params.diffusion_coeffs;
    return fd_interval_qsd(poly(params.drift_coeffs), poly(diff), params.domain_a,
                           params.domain_b, grid_size);
  }
  if (model_name == "bm-disk") return fd_disk_radial_qsd(grid_size);
  throw ParameterError("fd_eigensolver: no finite-difference oracle for \"" + model_name +
                       "\"");
}

}  // namespace qsd

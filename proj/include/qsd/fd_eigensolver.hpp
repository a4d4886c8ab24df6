#pragma once

#include <functional>
#include <vector>

#include "qsd/chain.hpp"
#include "qsd/registry.hpp"

namespace qsd {

struct FdResult {
  double lambda0 = 0.0;
  std::vector<double> nodes;    // grid coordinates
  std::vector<double> density;  // discrete QSD per unit coordinate length
};

// Second-order finite-difference generator for a 1-D diffusion on (a,b) with
// absorbing ends, fed through the chain spectral solver. Throws Error when a
// grid rate goes negative (drift too strong for the grid).
FdResult fd_interval_qsd(const std::function<double(double)>& drift,
                         const std::function<double(double)>& diffusion_scalar, double a,
                         double b, int grid_size);

// Radial reduction of Brownian motion on the unit disk (cell-centered grid,
// natural reflection at r=0, absorption at r=1). density is the radial
// marginal per unit r.
FdResult fd_disk_radial_qsd(int grid_size);

// Convenience dispatch for registry models ("bm-interval", "drifted-interval",
// "custom-polynomial" via coefficients, "bm-disk").
FdResult fd_eigensolver(const std::string& model_name, int grid_size,
                        const ModelParams& params = {});

// The finite-difference sub-generator itself (exposed for tests).
AbsorbingChain fd_interval_chain(const std::function<double(double)>& drift,
                                 const std::function<double(double)>& diffusion_scalar,
                                 double a, double b, int grid_size);
AbsorbingChain fd_disk_radial_chain(int grid_size);

}  // namespace qsd

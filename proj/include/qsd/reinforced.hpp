#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qsd/domain.hpp"
#include "qsd/model.hpp"
#include "qsd/occupation.hpp"
#include "qsd/simulate.hpp"

namespace qsd {

struct ReinforcedSnapshot {
  std::size_t cycle = 0;
  double theta = 0.0;
  double lambda0_estimate = 0.0;
  double boundary_layer_mass = 0.0;
  std::size_t entry_end = 0;  // occupation entries recorded up to this cycle
};

// Output of the self-interacting run: absorption clock, resampling points,
// and the shared occupation measure.
struct ReinforcedTrace {
  int dim = 1;
  std::vector<double> theta;            // strictly increasing absorption times
  std::vector<double> resample_points;  // flat Z_1..Z_n, all inside D
  OccupationMeasure occupation;
  std::vector<std::size_t> cycle_entry_end;  // occupation size after each cycle
  std::vector<ReinforcedSnapshot> snapshots;

  std::size_t n_cycles() const { return theta.size(); }
  std::span<const double> resample_point(std::size_t i) const {
    return {resample_points.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

struct ReinforcedOptions {
  SimOptions sim;
  // Occupation thinning: keep every thin-th step, banking the skipped time on
  // the kept state, so total_time stays exact. 1 = keep everything.
  std::size_t thin = 1;
  double eta_boundary = 0.05;       // boundary-layer width for snapshots
  std::size_t snapshot_base = 2;    // snapshots at 1, b, b^2, ... cycles
};

// Diffuse / absorb / resample-from-occupation loop. Cycle k starts where the
// previous resample landed; the first cycle starts at x0. Path noise for
// cycle k comes from the stream derived (seed, 2k), resampling draws from
// (seed, 2k+1).
ReinforcedTrace run_reinforced(const DiffusionModel& model, const Domain& domain,
                               std::span<const double> x0, double dt, std::size_t n_cycles,
                               std::uint64_t seed, const ReinforcedOptions& opts = {});

// mu_t(f) = (1/t) int f(Y_s) ds over the stored measure.
double occupation_average(const OccupationMeasure& occ,
                          const std::function<double(std::span<const double>)>& f);

// n / theta_n, the absorption-rate estimator.
double lambda0_estimate(const ReinforcedTrace& trace);

// Uniform-weight empirical measure over the resampling points, with exactly
// repeated points merged.
struct DiscreteMeasure {
  int dim = 1;
  std::vector<double> points;  // flat
  std::vector<double> masses;  // sum to 1
  std::size_t size() const { return masses.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};
DiscreteMeasure eta_n_measure(const ReinforcedTrace& trace);

// Occupation mass of the layer {x : boundary_distance(x) < eta}.
double boundary_layer_mass(const OccupationMeasure& occ, const Domain& domain, double eta);

// Diagnostic series (n, theta_n / n).
std::vector<std::pair<std::size_t, double>> theta_ratio_series(const ReinforcedTrace& trace);

}  // namespace qsd

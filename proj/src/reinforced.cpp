#include "qsd/reinforced.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

// Appends path states into the shared occupation measure, keeping every
// thin-th state and banking the skipped time on the kept one. The tail of a
// path (including the hit fraction) lands on the last interior state, so the
// measure's total time tracks theta exactly.
class OccupationSink final : public StepSink {
 public:
  OccupationSink(OccupationMeasure& occ, std::size_t thin) : occ_(occ), thin_(thin) {}

  void begin_path() {
    pending_ = 0.0;
    count_ = 0;
    have_last_ = false;
  }

  void occupy(std::span<const double> x, double w) override {
    pending_ += w;
    last_.assign(x.begin(), x.end());
    have_last_ = true;
    if (++count_ >= thin_) flush();
  }

  // Called at absorption: the remaining banked time goes to the last state.
  void end_path() {
    if (pending_ > 0.0 && have_last_) {
      occ_.add(last_, pending_);
      pending_ = 0.0;
    }
  }

 private:
  void flush() {
    occ_.add(last_, pending_);
    pending_ = 0.0;
    count_ = 0;
  }

  OccupationMeasure& occ_;
  std::size_t thin_;
  std::vector<double> last_;
  double pending_ = 0.0;
  std::size_t count_ = 0;
  bool have_last_ = false;
};

}  // namespace

ReinforcedTrace run_reinforced(const DiffusionModel& model, const Domain& domain,
                               std::span<const double> x0, double dt, std::size_t n_cycles,
                               std::uint64_t seed, const ReinforcedOptions& opts) {
  if (n_cycles < 1) throw ParameterError("run_reinforced: n_cycles must be >= 1");
  if (!domain.contains(x0)) throw PreconditionError("run_reinforced: x0 outside the domain");
  const std::size_t thin = std::max<std::size_t>(1, opts.thin);

  ReinforcedTrace trace;
  trace.dim = model.dim;
  trace.occupation = OccupationMeasure(model.dim);
  trace.theta.reserve(n_cycles);
  trace.resample_points.reserve(n_cycles * model.dim);
  trace.cycle_entry_end.reserve(n_cycles);

  OccupationSink sink(trace.occupation, thin);
  std::vector<double> start(x0.begin(), x0.end());
  std::size_t next_snapshot = 1;

  for (std::size_t k = 0; k < n_cycles; ++k) {
    RngStream path_rng = RngStream::derive(seed, 2 * k);
    sink.begin_path();
    simulate_absorbed(model, domain, start, dt, path_rng, sink, opts.sim);
    sink.end_path();

    // theta_k is read off the occupation accumulator so the reinforcement
    // consistency invariant holds exactly.
    trace.theta.push_back(trace.occupation.total_time());
    trace.cycle_entry_end.push_back(trace.occupation.size());

    RngStream resample_rng = RngStream::derive(seed, 2 * k + 1);
    auto z = trace.occupation.resample(resample_rng);
    trace.resample_points.insert(trace.resample_points.end(), z.begin(), z.end());
    start.assign(z.begin(), z.end());

    const std::size_t cycle = k + 1;
    if (cycle == next_snapshot || cycle == n_cycles) {
      ReinforcedSnapshot snap;
      snap.cycle = cycle;
      snap.theta = trace.theta.back();
      snap.lambda0_estimate = static_cast<double>(cycle) / snap.theta;
      snap.boundary_layer_mass =
          boundary_layer_mass(trace.occupation, domain, opts.eta_boundary);
      snap.entry_end = trace.occupation.size();
      trace.snapshots.push_back(std::move(snap));
      while (next_snapshot <= cycle)
        next_snapshot *= std::max<std::size_t>(2, opts.snapshot_base);
    }
  }
  return trace;
}

double occupation_average(const OccupationMeasure& occ,
                          const std::function<double(std::span<const double>)>& f) {
  return occ.average(f);
}

double lambda0_estimate(const ReinforcedTrace& trace) {
  if (trace.theta.empty()) throw PreconditionError("lambda0_estimate: empty trace");
  return static_cast<double>(trace.theta.size()) / trace.theta.back();
}

DiscreteMeasure eta_n_measure(const ReinforcedTrace& trace) {
  const std::size_t n = trace.n_cycles();
  if (n == 0 || trace.resample_points.empty())
    throw PreconditionError("eta_n_measure: no resampling points");
  const int d = trace.dim;
  std::map<std::vector<double>, std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    auto z = trace.resample_point(i);
    counts[std::vector<double>(z.begin(), z.end())]++;
  }
  DiscreteMeasure m;
  m.dim = d;
  for (const auto& [pt, c] : counts) {
    m.points.insert(m.points.end(), pt.begin(), pt.end());
    m.masses.push_back(static_cast<double>(c) / static_cast<double>(n));
  }
  return m;
}

double boundary_layer_mass(const OccupationMeasure& occ, const Domain& domain, double eta) {
  if (eta <= 0.0) return 0.0;  // stored states are interior, distance > 0
  return occ.average([&](std::span<const double> x) {
    return domain.boundary_distance(x) < eta ? 1.0 : 0.0;
  });
}

std::vector<std::pair<std::size_t, double>> theta_ratio_series(const ReinforcedTrace& trace) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(trace.theta.size());
  for (std::size_t i = 0; i < trace.theta.size(); ++i)
    out.emplace_back(i + 1, trace.theta[i] / static_cast<double>(i + 1));
  return out;
}

}  // namespace qsd

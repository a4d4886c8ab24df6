#include "qsd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "qsd/apt.hpp"
#include "qsd/chain.hpp"
#include "qsd/chain_reinforced.hpp"
#include "qsd/csv.hpp"
#include "qsd/errors.hpp"
#include "qsd/fd_eigensolver.hpp"
#include "qsd/flow.hpp"
#include "qsd/ks.hpp"
#include "qsd/references.hpp"
#include "qsd/reinforced.hpp"
#include "qsd/spectral.hpp"

namespace qsd {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "1";

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// 1-D coordinate of an occupation entry: the point itself, or the radius in
// dimension two (references are radial there).
void extract_coords(const OccupationMeasure& occ, std::size_t lo, std::size_t hi,
                    std::vector<double>& coords, std::vector<double>& weights) {
  coords.clear();
  weights.clear();
  coords.reserve(hi - lo);
  weights.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    const auto x = occ.state(i);
    coords.push_back(occ.dim() == 1 ? x[0] : std::sqrt(x[0] * x[0] + x[1] * x[1]));
    weights.push_back(occ.weight(i));
  }
}

struct ParallelOutcome {
  bool ok = true;
  std::string message;
};

// Runs fn(i) for i in [0, count) on up to `jobs` threads; exceptions are
// captured per index.
std::vector<ParallelOutcome> parallel_for(std::size_t count, std::size_t jobs,
                                          const std::function<void(std::size_t)>& fn) {
  std::vector<ParallelOutcome> out(count);
  if (count == 0) return out;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (const std::exception& ex) {
        out[i].ok = false;
        out[i].message = ex.what();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_histogram(const std::string& path, std::span<const double> coords,
                     std::span<const double> weights, double lo, double hi, int bins) {
  CsvWriter csv(path);
  csv.header({"schema_version", "bin_left", "bin_right", "mass"});
  std::vector<double> mass(bins, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    int b = static_cast<int>((coords[i] - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    mass[b] += w;
    total += w;
  }
  for (int b = 0; b < bins; ++b) {
    const double left = lo + (hi - lo) * b / bins;
    const double right = lo + (hi - lo) * (b + 1) / bins;
    csv.row({kSchema, CsvWriter::fmt(left), CsvWriter::fmt(right),
             CsvWriter::fmt(total > 0 ? mass[b] / total : 0.0)});
  }
}

struct ReplicaValues {
  double lambda0 = std::nan("");
  double ks_final = std::nan("");
};

ExperimentResult finish_summary(const ExperimentConfig& cfg,
                                const std::vector<ParallelOutcome>& outcomes,
                                const std::vector<ReplicaValues>& values,
                                std::vector<std::string> artifacts,
                                const std::string& ks_label) {
  ExperimentResult res;
  {
    const std::string path = join_path(cfg.output_dir, "replicas.csv");
    CsvWriter csv(path);
    csv.header({"schema_version", "replica", "status", "lambda0_estimate", ks_label});
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      csv.row({kSchema, CsvWriter::fmt(i), outcomes[i].ok ? "ok" : sanitize(outcomes[i].message),
               CsvWriter::fmt(values[i].lambda0), CsvWriter::fmt(values[i].ks_final)});
    }
    artifacts.push_back(path);
  }
  {
    std::vector<double> lambdas, kss;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].ok) continue;
      lambdas.push_back(values[i].lambda0);
      if (std::isfinite(values[i].ks_final)) kss.push_back(values[i].ks_final);
    }
    const std::string path = join_path(cfg.output_dir, "summary.csv");
    CsvWriter csv(path);
    csv.header({"schema_version", "quantity", "median", "iqr", "count"});
    csv.row({kSchema, "lambda0_estimate", CsvWriter::fmt(quantile(lambdas, 0.5)),
             CsvWriter::fmt(quantile(lambdas, 0.75) - quantile(lambdas, 0.25)),
             CsvWriter::fmt(lambdas.size())});
    if (!kss.empty()) {
      csv.row({kSchema, ks_label, CsvWriter::fmt(quantile(kss, 0.5)),
               CsvWriter::fmt(quantile(kss, 0.75) - quantile(kss, 0.25)),
               CsvWriter::fmt(kss.size())});
    }
    artifacts.push_back(path);
  }
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    res.replicas.push_back({i, outcomes[i].ok, outcomes[i].message, std::string{}});
    if (!outcomes[i].ok) res.exit_status = 1;
  }
  res.artifacts = std::move(artifacts);
  return res;
}

std::string replica_name(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.csv", stem, i);
  return buf;
}

// Occupation entries remaining after dropping the first burn fraction of
// cycles.
std::size_t burn_in_entry(const ReinforcedTrace& trace, double burn_fraction,
                          std::size_t cycle_count) {
  const std::size_t burn_k =
      static_cast<std::size_t>(burn_fraction * static_cast<double>(cycle_count));
  return burn_k >= 1 ? trace.cycle_entry_end[burn_k - 1] : 0;
}

ExperimentResult run_simulate(const ExperimentConfig& cfg) {
  const ModelInstance inst = make_builtin_model(cfg.model, cfg.model_params);
  std::optional<ReferenceQSD> ref;
  if (cfg.reference) ref = reference_by_name(*cfg.reference);

  std::vector<ReplicaValues> values(cfg.replicas);
  std::vector<std::string> artifacts(cfg.replicas);

  auto body = [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, i);

    std::vector<double> x0 = cfg.x0.empty() ? inst.domain.interior_point : cfg.x0;
    if (cfg.initial_law == "uniform-box") {
      if (static_cast<int>(cfg.initial_box_lo.size()) != inst.model.dim)
        throw ConfigError("initial_box_lo/hi dimension mismatch with the model",
                          "initial_box_lo", 0);
      RngStream init_rng = RngStream::derive(seed, 0x7fffffffffffffffULL);
      x0.resize(inst.model.dim);
      for (int attempt = 0; attempt < 10000; ++attempt) {
        for (int d = 0; d < inst.model.dim; ++d) {
          x0[d] = cfg.initial_box_lo[d] +
                  (cfg.initial_box_hi[d] - cfg.initial_box_lo[d]) * init_rng.uniform();
        }
        if (inst.domain.contains(x0)) break;
        if (attempt == 9999)
          throw ConfigError("initial box does not intersect the domain", "initial_box_lo", 0);
      }
    }

    ReinforcedOptions opts;
    opts.sim.max_steps = cfg.max_steps;
    opts.sim.bridge_correction = cfg.bridge_correction;
    opts.thin = cfg.thin;
    opts.eta_boundary = cfg.eta_boundary;
    opts.snapshot_base = cfg.snapshot_base;

    const ReinforcedTrace trace =
        run_reinforced(inst.model, inst.domain, x0, cfg.dt, cfg.n_cycles, seed, opts);

    std::vector<double> coords, weights;
    const std::string path = join_path(cfg.output_dir, replica_name("replica", i));
    {
      CsvWriter csv(path);
      csv.header({"schema_version", "cycle", "theta", "theta_over_n", "lambda0_estimate",
                  "ks_to_reference", "boundary_layer_mass"});
      for (const auto& snap : trace.snapshots) {
        std::string ks_cell;
        if (ref) {
          const std::size_t lo = burn_in_entry(trace, cfg.burn_in_fraction, snap.cycle);
          extract_coords(trace.occupation, lo, snap.entry_end, coords, weights);
          ks_cell = CsvWriter::fmt(ks_distance(coords, weights, ref->cdf));
        }
        csv.row({kSchema, CsvWriter::fmt(snap.cycle), CsvWriter::fmt(snap.theta),
                 CsvWriter::fmt(snap.theta / static_cast<double>(snap.cycle)),
                 CsvWriter::fmt(snap.lambda0_estimate), ks_cell,
                 CsvWriter::fmt(snap.boundary_layer_mass)});
      }
    }
    artifacts[i] = path;

    // Distribution dumps for plotting: occupation and resampling measures.
    const double lo_coord = inst.model.dim == 1 ? inst.domain.box_lo[0] : 0.0;
    const double hi_coord = inst.model.dim == 1 ? inst.domain.box_hi[0] : 1.0;
    extract_coords(trace.occupation, 0, trace.occupation.size(), coords, weights);
    write_histogram(join_path(cfg.output_dir, replica_name("mu_hist", i)), coords, weights,
                    lo_coord, hi_coord, 100);
    {
      std::vector<double> zc;
      zc.reserve(trace.n_cycles());
      for (std::size_t k = 0; k < trace.n_cycles(); ++k) {
        const auto z = trace.resample_point(k);
        zc.push_back(inst.model.dim == 1 ? z[0] : std::sqrt(z[0] * z[0] + z[1] * z[1]));
      }
      write_histogram(join_path(cfg.output_dir, replica_name("eta_hist", i)), zc, {}, lo_coord,
                      hi_coord, 100);
    }

    values[i].lambda0 = lambda0_estimate(trace);
    if (ref) {
      const std::size_t lo = burn_in_entry(trace, cfg.burn_in_fraction, trace.n_cycles());
      extract_coords(trace.occupation, lo, trace.occupation.size(), coords, weights);
      values[i].ks_final = ks_distance(coords, weights, ref->cdf);
    }
  };

  const auto outcomes = parallel_for(cfg.replicas, cfg.jobs, body);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < cfg.replicas; ++i)
    if (outcomes[i].ok) files.push_back(artifacts[i]);
  return finish_summary(cfg, outcomes, values, std::move(files), "ks_final");
}

ExperimentResult run_finite_lab(const ExperimentConfig& cfg) {
  const AbsorbingChain chain = AbsorbingChain::load_file(cfg.chain_file);
  const SpectralData sd = spectral(chain);

  std::vector<ReplicaValues> values(cfg.replicas);
  std::vector<std::string> artifacts(cfg.replicas);

  auto body = [&](std::size_t i) {
    RngStream rng(derive_seed(cfg.master_seed, i));
    const ChainTrace trace =
        reinforced_chain(chain, cfg.n_cycles, rng, 0, cfg.snapshot_base);

    // eta_n prefix counts aligned with the snapshot cycles.
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(chain.n());
    std::size_t consumed = 0;

    const std::string path = join_path(cfg.output_dir, replica_name("lab", i));
    {
      CsvWriter csv(path);
      csv.header({"schema_version", "cycle", "theta", "theta_over_n", "lambda0_estimate",
                  "tv_occupation_to_alpha", "tv_eta_to_alpha"});
      for (const auto& snap : trace.snapshots) {
        while (consumed < snap.cycle) counts(trace.resample_states[consumed++]) += 1.0;
        const Eigen::VectorXd eta = counts / static_cast<double>(snap.cycle);
        csv.row({kSchema, CsvWriter::fmt(snap.cycle), CsvWriter::fmt(snap.theta),
                 CsvWriter::fmt(snap.theta / static_cast<double>(snap.cycle)),
                 CsvWriter::fmt(static_cast<double>(snap.cycle) / snap.theta),
                 CsvWriter::fmt(tv_distance(snap.occupation, sd.alpha)),
                 CsvWriter::fmt(tv_distance(eta, sd.alpha))});
      }
    }
    artifacts[i] = path;

    {
      CsvWriter csv(join_path(cfg.output_dir, replica_name("lab_occupation", i)));
      csv.header({"schema_version", "state", "occupation_time", "mass"});
      const double total = trace.theta.back();
      for (int s = 0; s < chain.n(); ++s)
        csv.row({kSchema, CsvWriter::fmt(s), CsvWriter::fmt(trace.occupation_time(s)),
                 CsvWriter::fmt(trace.occupation_time(s) / total)});
    }

    values[i].lambda0 = trace.lambda0_estimate();
    values[i].ks_final = tv_distance(trace.eta_counts(), sd.alpha);
  };

  const auto outcomes = parallel_for(cfg.replicas, cfg.jobs, body);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < cfg.replicas; ++i)
    if (outcomes[i].ok) files.push_back(artifacts[i]);
  return finish_summary(cfg, outcomes, values, std::move(files), "tv_eta_final");
}

ExperimentResult run_verify(const ExperimentConfig& cfg) {
  const AbsorbingChain chain = AbsorbingChain::load_file(cfg.chain_file);
  ExperimentResult res;
  const std::string path = join_path(cfg.output_dir, "verify_report.csv");
  CsvWriter csv(path);
  csv.header({"schema_version", "quantity", "n_or_t", "value", "bound", "pass"});
  bool all_pass = true;
  auto row = [&](const std::string& quantity, const std::string& x, double value, double bound,
                 bool pass) {
    csv.row({kSchema, quantity, x, CsvWriter::fmt(value), CsvWriter::fmt(bound),
             pass ? "1" : "0"});
    all_pass = all_pass && pass;
  };

  const SpectralData sd = spectral(chain);
  const Eigen::MatrixXd A = green(chain);
  const int n = chain.n();
  const double qscale = std::max(1.0, chain.Q().cwiseAbs().maxCoeff());

  const double green_resid =
      (A * (-chain.Q()) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  row("green_identity_residual", "", green_resid, 1e-10, green_resid <= 1e-10);

  const double alpha_resid =
      (sd.alpha.transpose() * chain.Q() + sd.lambda0 * sd.alpha.transpose())
          .cwiseAbs()
          .maxCoeff();
  row("alpha_eigen_residual", "", alpha_resid, 1e-10 * qscale, alpha_resid <= 1e-10 * qscale);
  const double eta_resid = (chain.Q() * sd.eta + sd.lambda0 * sd.eta).cwiseAbs().maxCoeff();
  row("eta_eigen_residual", "", eta_resid, 1e-10 * qscale * sd.eta.maxCoeff(),
      eta_resid <= 1e-10 * qscale * sd.eta.maxCoeff());
  row("alpha_eta_normalization", "", std::abs(sd.alpha.dot(sd.eta) - 1.0), 1e-10,
      std::abs(sd.alpha.dot(sd.eta) - 1.0) <= 1e-10);

  {
    RngStream rng(20240915);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd f(n);
      for (int j = 0; j < n; ++j) f(j) = 2.0 * rng.uniform() - 1.0;
      const double left = (sd.alpha.transpose() * A * f)(0);
      const double right = sd.alpha.dot(f) / sd.lambda0;
      // relative to the operator scale ||f||_inf / lambda0
      const double scale = f.cwiseAbs().maxCoeff() / sd.lambda0;
      worst = std::max(worst, std::abs(left - right) / std::max(1e-300, scale));
    }
    row("alpha_green_identity_rel_err", "", worst, 1e-10, worst <= 1e-10);
  }

  {
    RngStream rng(77);
    const double s = 0.3 + rng.uniform(), t = 0.3 + rng.uniform();
    const double ck =
        (semigroup(chain, s) * semigroup(chain, t) - semigroup(chain, s + t))
            .cwiseAbs()
            .maxCoeff();
    row("semigroup_chapman_kolmogorov", CsvWriter::fmt(s + t), ck, 1e-10, ck <= 1e-10);
  }

  {
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / n);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    for (int k = 1; k <= 5; ++k) {
      const GreenPowerValues v = green_power_values(chain, mu, ones, k);
      const double rel = std::abs(v.matrix_value - v.quadrature_value) /
                         std::max(1e-300, std::abs(v.matrix_value));
      row("green_power_rel_err", CsvWriter::fmt(k), rel, 1e-6, rel <= 1e-6);
    }
  }

  {
    const Eigen::VectorXd mu = Eigen::VectorXd::Unit(n, 0);
    const DecayReport rep = verify_powers_bound(chain, mu, cfg.nmax);
    for (std::size_t k = 0; k < rep.xs.size(); ++k)
      row("powers_tv", CsvWriter::fmt(rep.xs[k]), rep.distances[k],
          std::numeric_limits<double>::infinity(), true);
    row("powers_fitted_slope", "", rep.fitted_slope, rep.bound_slope + 0.01, rep.pass);

    std::vector<double> grid;
    if (cfg.tmax > 0.0)
      for (int g = 0; g <= 24; ++g) grid.push_back(cfg.tmax * g / 24.0);
    const DecayReport fr = verify_exp_flow_bound(chain, mu, grid);
    for (std::size_t k = 0; k < fr.xs.size(); ++k)
      row("expflow_tv", CsvWriter::fmt(fr.xs[k]), fr.distances[k],
          std::numeric_limits<double>::infinity(), true);
    row("expflow_fitted_slope", "", fr.fitted_slope, fr.bound_slope + 0.01, fr.pass);
  }

  {
    const Eigen::VectorXd mu = Eigen::VectorXd::Unit(n, 0);
    const FlowTrajectory traj = flow_ode(chain, mu, 10.0 / sd.lambda0, 1e-10);
    row("flow_ode_max_tv", "", traj.max_tv, 1e-8, traj.max_tv <= 1e-8);
    double mass_drift = 0.0;
    for (const auto& st : traj.states) mass_drift = std::max(mass_drift, std::abs(st.sum() - 1.0));
    row("flow_mass_drift", "", mass_drift, 1e-9, mass_drift <= 1e-9);
    const double fp = flow_rhs(A, sd.alpha).cwiseAbs().maxCoeff();
    row("flow_fixed_point_residual", "", fp, 1e-12, fp <= 1e-12);
  }

  {
    const A1A2Result a = check_A1_A2(chain, 1.0 / sd.lambda0);
    row("a1_c1", CsvWriter::fmt(1.0 / sd.lambda0), a.c1, 0.0, a.c1 > 0.0);
    row("a2_c2", "", a.c2, 0.0, a.ok && a.c2 > 0.0);
  }

  res.artifacts.push_back(path);
  res.exit_status = all_pass ? 0 : 3;
  return res;
}

ExperimentResult run_benchmark(const ExperimentConfig& cfg) {
  const ReferenceQSD ref = reference_by_name(cfg.benchmark_name);
  const FdResult fd = fd_eigensolver(cfg.benchmark_name, cfg.grid);
  ExperimentResult res;

  {
    const std::string path = join_path(cfg.output_dir, "reference.csv");
    CsvWriter csv(path);
    csv.header({"schema_version", "x", "density", "cdf"});
    const int pts = 1001;
    for (int i = 0; i <= pts - 1; ++i) {
      const double x = ref.lo + (ref.hi - ref.lo) * i / (pts - 1);
      csv.row({kSchema, CsvWriter::fmt(x), CsvWriter::fmt(ref.density(x)),
               CsvWriter::fmt(ref.cdf(x))});
    }
    res.artifacts.push_back(path);
  }
  {
    const std::string path = join_path(cfg.output_dir, "fd_density.csv");
    CsvWriter csv(path);
    csv.header({"schema_version", "x", "density"});
    for (std::size_t i = 0; i < fd.nodes.size(); ++i)
      csv.row({kSchema, CsvWriter::fmt(fd.nodes[i]), CsvWriter::fmt(fd.density[i])});
    res.artifacts.push_back(path);
  }
  {
    const std::string path = join_path(cfg.output_dir, "benchmark.csv");
    CsvWriter csv(path);
    csv.header({"schema_version", "quantity", "value", "bound", "pass"});
    const double tol = 1e-3 * std::max(1.0, (512.0 / cfg.grid) * (512.0 / cfg.grid));
    const double rel = std::abs(fd.lambda0 - ref.lambda0) / ref.lambda0;
    double node_err = 0.0;
    for (std::size_t i = 0; i < fd.nodes.size(); ++i)
      node_err = std::max(node_err, std::abs(fd.density[i] - ref.density(fd.nodes[i])));
    const bool p1 = rel <= tol, p2 = node_err <= tol;
    csv.row({kSchema, "lambda0_reference", CsvWriter::fmt(ref.lambda0), "", ""});
    csv.row({kSchema, "lambda0_fd", CsvWriter::fmt(fd.lambda0), "", ""});
    csv.row({kSchema, "lambda0_rel_err", CsvWriter::fmt(rel), CsvWriter::fmt(tol),
             p1 ? "1" : "0"});
    csv.row({kSchema, "density_max_node_err", CsvWriter::fmt(node_err), CsvWriter::fmt(tol),
             p2 ? "1" : "0"});
    res.artifacts.push_back(path);
    res.exit_status = (p1 && p2) ? 0 : 3;
  }
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.output_dir);
  switch (config.command) {
    case Command::Simulate: return run_simulate(config);
    case Command::FiniteLab: return run_finite_lab(config);
    case Command::Verify: return run_verify(config);
    case Command::Benchmark: return run_benchmark(config);
  }
  throw ParameterError("unknown command");
}

}  // namespace qsd

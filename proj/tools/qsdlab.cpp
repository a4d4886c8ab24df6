// Experiment runner: simulate | finite-lab | verify | benchmark.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsd/config.hpp"
#include "qsd/errors.hpp"
#include "qsd/experiment.hpp"

namespace {

void apply_output_dir(qsd::ExperimentConfig& cfg, const std::string& out_flag) {
  if (!out_flag.empty()) {
    cfg.output_dir = out_flag;
    return;
  }
  if (const char* env = std::getenv("QSDLAB_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
}

int finish(const qsd::ExperimentResult& res) {
  for (const auto& r : res.replicas) {
    if (!r.ok) std::cerr << "replica " << r.index << " failed: " << r.message << "\n";
  }
  for (const auto& a : res.artifacts) std::cout << "wrote " << a << "\n";
  return res.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-stationary distribution toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, chain_file, bench_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t jobs = 0, cycles = 0, replicas = 1;
  int nmax = 30, grid = 256;
  double tmax = 0.0;

  auto* sim = app.add_subcommand("simulate", "run reinforced diffusion replicas from a config");
  sim->add_option("--config", config_path, "experiment config file")->required();
  sim->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  sim->add_option("--jobs", jobs, "parallel replica limit");
  sim->add_option("--out", out_dir, "output directory override");

  auto* lab = app.add_subcommand("finite-lab", "exact reinforced run on a finite chain");
  lab->add_option("--chain", chain_file, "chain specification file")->required();
  lab->add_option("--cycles", cycles, "number of absorption cycles")->required();
  lab->add_option("--replicas", replicas, "independent replicas");
  lab->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    seed_set = true;
  });
  lab->add_option("--jobs", jobs, "parallel replica limit");
  lab->add_option("--out", out_dir, "output directory");

  auto* ver = app.add_subcommand("verify", "operator identity and bound battery on a chain");
  ver->add_option("--chain", chain_file, "chain specification file")->required();
  ver->add_option("--nmax", nmax, "largest Green power checked");
  ver->add_option("--tmax", tmax, "flow-grid horizon (0 = auto)");
  ver->add_option("--out", out_dir, "output directory");

  auto* ben = app.add_subcommand("benchmark", "analytic reference vs finite differences");
  ben->add_option("--name", bench_name, "bm-interval or bm-disk")->required();
  ben->add_option("--grid", grid, "finite-difference grid size");
  ben->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    qsd::ExperimentConfig cfg;
    if (sim->parsed()) {
      cfg = qsd::parse_config_file(config_path);
      if (cfg.command != qsd::Command::Simulate)
        throw qsd::ConfigError("config command is not \"simulate\"", "command", 0);
      if (seed_set) cfg.master_seed = seed;
      if (jobs) cfg.jobs = jobs;
    } else if (lab->parsed()) {
      cfg.command = qsd::Command::FiniteLab;
      cfg.chain_file = chain_file;
      cfg.n_cycles = cycles;
      cfg.replicas = replicas;
      if (seed_set) cfg.master_seed = seed;
      if (jobs) cfg.jobs = jobs;
    } else if (ver->parsed()) {
      cfg.command = qsd::Command::Verify;
      cfg.chain_file = chain_file;
      cfg.nmax = nmax;
      cfg.tmax = tmax;
    } else {
      cfg.command = qsd::Command::Benchmark;
      cfg.benchmark_name = bench_name;
      cfg.grid = grid;
    }
    apply_output_dir(cfg, out_dir);
    return finish(qsd::run_experiment(cfg));
  } catch (const qsd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsd/registry.hpp"

namespace qsd {

enum class Command { Simulate, FiniteLab, Verify, Benchmark };

std::string to_string(Command c);

// Parsed experiment description. See configs/bm_interval.cfg for the schema.
struct ExperimentConfig {
  Command command = Command::Simulate;

  // simulate
  std::string model;  // registry name
  ModelParams model_params;
  double dt = 0.0;
  std::size_t n_cycles = 0;
  std::size_t replicas = 1;
  std::uint64_t master_seed = 1;
  std::string output_dir = "qsdlab-out";
  std::size_t thin = 1;
  std::uint64_t max_steps = 1'000'000'000ULL;
  bool bridge_correction = false;
  std::string initial_law = "delta";  // "delta" | "uniform-box"
  std::vector<double> x0;             // empty: the domain's interior point
  std::vector<double> initial_box_lo, initial_box_hi;
  double burn_in_fraction = 0.1;  // discarded cycle fraction for summary KS

  // diagnostics
  double eta_boundary = 0.05;
  std::size_t snapshot_base = 2;
  std::optional<std::string> reference;  // "bm-interval" | "bm-disk"

  // finite-lab / verify
  std::string chain_file;
  int nmax = 30;
  double tmax = 0.0;  // 0: auto grid

  // benchmark
  std::string benchmark_name;
  int grid = 256;

  std::size_t jobs = 0;  // 0: hardware concurrency
};

// Strict parse of the key = value document; unknown keys, bad values and
// missing required fields throw ConfigError with the key and line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace qsd

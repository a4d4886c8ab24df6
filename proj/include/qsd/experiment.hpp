#pragma once

#include <string>
#include <vector>

#include "qsd/config.hpp"

namespace qsd {

struct ReplicaStatus {
  std::size_t index = 0;
  bool ok = false;
  std::string message;  // error text when !ok
  std::string csv_path;
};

struct ExperimentResult {
  int exit_status = 0;
  std::vector<ReplicaStatus> replicas;
  std::vector<std::string> artifacts;  // all files written
};

// Dispatches on config.command, writes CSV artifacts under
// config.output_dir, and returns per-replica statuses. Replica i runs with
// the seed derived from (master_seed, i); failures never abort siblings.
ExperimentResult run_experiment(const ExperimentConfig& config);

// CSV schema version stamped into every artifact.
inline constexpr int kCsvSchemaVersion = 1;

}  // namespace qsd

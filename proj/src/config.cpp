#include "qsd/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

std::string to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::FiniteLab: return "finite-lab";
    case Command::Verify: return "verify";
    case Command::Benchmark: return "benchmark";
  }
  return "?";
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Entries {
 public:
  void insert(const std::string& key, const std::string& value, int line) {
    if (map_.count(key))
      throw ConfigError("duplicate key \"" + key + "\" (line " + std::to_string(line) + ")",
                        key, line);
    map_[key] = {value, line};
  }

  const RawEntry* find(const std::string& key) {
    seen_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : map_) {
      if (!seen_.count(key))
        throw ConfigError("unknown key \"" + key + "\" (line " + std::to_string(entry.line) +
                          ")", key, entry.line);
    }
  }

 private:
  std::map<std::string, RawEntry> map_;
  std::set<std::string> seen_;
};

double parse_double(const std::string& key, const RawEntry& e) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key \"" + key + "\": not a number: \"" + e.value + "\" (line " +
                      std::to_string(e.line) + ")", key, e.line);
  }
}

std::uint64_t parse_u64(const std::string& key, const RawEntry& e) {
  std::uint64_t v = 0;
  const auto* begin = e.value.data();
  const auto* end = begin + e.value.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("key \"" + key + "\": not a nonnegative integer: \"" + e.value +
                      "\" (line " + std::to_string(e.line) + ")", key, e.line);
  return v;
}

bool parse_bool(const std::string& key, const RawEntry& e) {
  if (e.value == "true" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "off" || e.value == "0") return false;
  throw ConfigError("key \"" + key + "\": expected true/false (line " +
                    std::to_string(e.line) + ")", key, e.line);
}

std::vector<double> parse_list(const std::string& key, const RawEntry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    RawEntry sub{item, e.line};
    out.push_back(parse_double(key, sub));
  }
  if (out.empty())
    throw ConfigError("key \"" + key + "\": empty list (line " + std::to_string(e.line) + ")",
                      key, e.line);
  return out;
}

[[noreturn]] void range_error(const std::string& key, const RawEntry& e, const std::string& what) {
  throw ConfigError("key \"" + key + "\": " + what + " (line " + std::to_string(e.line) + ")",
                    key, e.line);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Entries entries;
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value (line " + std::to_string(lineno) + ")", "",
                          lineno);
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("empty key or value (line " + std::to_string(lineno) + ")", key,
                          lineno);
      entries.insert(key, value, lineno);
    }
  }

  ExperimentConfig cfg;

  const RawEntry* e = entries.find("command");
  if (!e) throw ConfigError("missing required key \"command\"", "command", 0);
  if (e->value == "simulate") cfg.command = Command::Simulate;
  else if (e->value == "finite-lab") cfg.command = Command::FiniteLab;
  else if (e->value == "verify") cfg.command = Command::Verify;
  else if (e->value == "benchmark") cfg.command = Command::Benchmark;
  else range_error("command", *e, "must be simulate|finite-lab|verify|benchmark");

  if ((e = entries.find("model"))) {
    static const std::set<std::string> known{"bm-interval", "bm-disk", "drifted-interval",
                                             "custom-polynomial"};
    if (!known.count(e->value)) range_error("model", *e, "unknown model \"" + e->value + "\"");
    cfg.model = e->value;
  }
  if ((e = entries.find("drift_c"))) cfg.model_params.drift_c = parse_double("drift_c", *e);
  if ((e = entries.find("domain_a"))) cfg.model_params.domain_a = parse_double("domain_a", *e);
  if ((e = entries.find("domain_b"))) cfg.model_params.domain_b = parse_double("domain_b", *e);
  if ((e = entries.find("drift_coeffs")))
    cfg.model_params.drift_coeffs = parse_list("drift_coeffs", *e);
  if ((e = entries.find("diffusion_coeffs")))
    cfg.model_params.diffusion_coeffs = parse_list("diffusion_coeffs", *e);

  if ((e = entries.find("dt"))) {
    cfg.dt = parse_double("dt", *e);
    if (!(cfg.dt > 0.0)) range_error("dt", *e, "must be positive");
  }
  if ((e = entries.find("n_cycles"))) {
    cfg.n_cycles = parse_u64("n_cycles", *e);
    if (cfg.n_cycles < 1) range_error("n_cycles", *e, "must be >= 1");
  }
  if ((e = entries.find("replicas"))) {
    cfg.replicas = parse_u64("replicas", *e);
    if (cfg.replicas < 1) range_error("replicas", *e, "must be >= 1");
  }
  if ((e = entries.find("master_seed"))) cfg.master_seed = parse_u64("master_seed", *e);
  if ((e = entries.find("output_dir"))) cfg.output_dir = e->value;
  if ((e = entries.find("thin"))) {
    cfg.thin = parse_u64("thin", *e);
    if (cfg.thin < 1) range_error("thin", *e, "must be >= 1");
  }
  if ((e = entries.find("max_steps"))) {
    cfg.max_steps = parse_u64("max_steps", *e);
    if (cfg.max_steps < 1) range_error("max_steps", *e, "must be >= 1");
  }
  if ((e = entries.find("bridge_correction")))
    cfg.bridge_correction = parse_bool("bridge_correction", *e);
  if ((e = entries.find("initial_law"))) {
    if (e->value != "delta" && e->value != "uniform-box")
      range_error("initial_law", *e, "must be delta|uniform-box");
    cfg.initial_law = e->value;
  }
  if ((e = entries.find("x0"))) cfg.x0 = parse_list("x0", *e);
  if ((e = entries.find("initial_box_lo"))) cfg.initial_box_lo = parse_list("initial_box_lo", *e);
  if ((e = entries.find("initial_box_hi"))) cfg.initial_box_hi = parse_list("initial_box_hi", *e);
  if ((e = entries.find("burn_in_fraction"))) {
    cfg.burn_in_fraction = parse_double("burn_in_fraction", *e);
    if (cfg.burn_in_fraction < 0.0 || cfg.burn_in_fraction >= 1.0)
      range_error("burn_in_fraction", *e, "must be in [0,1)");
  }

  if ((e = entries.find("diagnostics.eta_boundary"))) {
    cfg.eta_boundary = parse_double("diagnostics.eta_boundary", *e);
    if (!(cfg.eta_boundary > 0.0))
      range_error("diagnostics.eta_boundary", *e, "must be positive");
  }
  if ((e = entries.find("diagnostics.snapshot_base"))) {
    cfg.snapshot_base = parse_u64("diagnostics.snapshot_base", *e);
    if (cfg.snapshot_base < 2) range_error("diagnostics.snapshot_base", *e, "must be >= 2");
  }
  if ((e = entries.find("reference"))) {
    if (e->value != "bm-interval" && e->value != "bm-disk")
      range_error("reference", *e, "must be bm-interval|bm-disk");
    cfg.reference = e->value;
  }

  if ((e = entries.find("chain_file"))) cfg.chain_file = e->value;
  if ((e = entries.find("nmax"))) {
    cfg.nmax = static_cast<int>(parse_u64("nmax", *e));
    if (cfg.nmax < 5) range_error("nmax", *e, "must be >= 5");
  }
  if ((e = entries.find("tmax"))) {
    cfg.tmax = parse_double("tmax", *e);
    if (cfg.tmax < 0.0) range_error("tmax", *e, "must be nonnegative");
  }
  if ((e = entries.find("benchmark_name"))) cfg.benchmark_name = e->value;
  if ((e = entries.find("grid"))) {
    cfg.grid = static_cast<int>(parse_u64("grid", *e));
    if (cfg.grid < 16) range_error("grid", *e, "must be >= 16");
  }
  if ((e = entries.find("jobs"))) cfg.jobs = parse_u64("jobs", *e);

  entries.reject_unknown();

  // Per-command required fields.
  auto require = [&](bool ok, const std::string& key) {
    if (!ok)
      throw ConfigError("missing required key \"" + key + "\" for command " +
                        to_string(cfg.command), key, 0);
  };
  switch (cfg.command) {
    case Command::Simulate:
      require(!cfg.model.empty(), "model");
      require(cfg.dt > 0.0, "dt");
      require(cfg.n_cycles >= 1, "n_cycles");
      break;
    case Command::FiniteLab:
      require(!cfg.chain_file.empty(), "chain_file");
      require(cfg.n_cycles >= 1, "n_cycles");
      break;
    case Command::Verify:
      require(!cfg.chain_file.empty(), "chain_file");
      break;
    case Command::Benchmark:
      require(!cfg.benchmark_name.empty(), "benchmark_name");
      break;
  }
  if (cfg.initial_law == "uniform-box") {
    if (cfg.initial_box_lo.empty() || cfg.initial_box_lo.size() != cfg.initial_box_hi.size())
      throw ConfigError("initial_law uniform-box needs matching initial_box_lo/hi",
                        "initial_box_lo", 0);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qsd

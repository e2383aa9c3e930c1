#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plap/bounds.hpp"

// Experiment configuration: one canonical JSON document is the source of
// truth; CLI flags override individual fields by dotted path. The manifest
// hash is FNV-1a over the canonical (sorted-key) dump of the effective
// config, so equal hashes mean equal experiments.

namespace plap {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct GridConfig {
  int nx = 8, ny = 8;
  double lx = 1.0, ly = 1.0;
  GridDomain make() const { return make_grid(nx, ny, lx, ly); }
};

struct ExperimentConfig {
  GridConfig grid;
  FlowParams flow;
  RandomWeightModel weight_model;
  RandomInitModel init_model;
  std::vector<double> time_grid{0.2, 0.5, 1.0, 2.0, 5.0};
  int steps_per_unit_time = 100;
  int ensemble_n = 50;
  uint64_t base_seed = 20240801;
  VerifyOptions bounds;
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError with field paths
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

ExperimentConfig default_config();

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

// "grid.nx=16" style override; the value is parsed as JSON when possible and
// falls back to a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides);

uint64_t fnv1a64(const void* data, size_t len);
std::string config_hash_hex(const ExperimentConfig& cfg);

}  // namespace plap

#pragma once

#include <filesystem>

#include "plap/config.hpp"

// Subcommand drivers behind the command-line front end. Each writes its data
// files plus a manifest with per-file checksums into the output directory and
// returns the process exit status. All output bytes are a pure function of
// (config, artifact version); the manifest's wall-clock entry is the one
// intentionally nondeterministic field.

namespace plap::cli {

int cmd_evolve(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_ensemble(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int threads);
int cmd_constants(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& data_dir);

nlohmann::json ensemble_to_json(const EnsembleResult& ens, const std::string& config_hash);
EnsembleResult ensemble_from_json(const nlohmann::json& j, std::string* config_hash_out);
nlohmann::json constants_to_json(const ConstantSet& consts);
nlohmann::json report_to_json(const BoundReport& report);

}  // namespace plap::cli

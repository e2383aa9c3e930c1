#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "plap/cli.hpp"

// plapflow: pathwise solver and bound-verification lab for the randomized
// weighted p-Laplacian Neumann flow. Subcommands: evolve, ensemble,
// constants, verify.

int main(int argc, char** argv) {
  CLI::App app{"randomized weighted p-Laplacian Neumann flow laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 1;
  bool have_seed = false;
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_threads) {
    sub->add_option("--config", config_path, "config JSON file");
    sub->add_option("--set", overrides, "override a config field, e.g. --set grid.nx=16")
        ->take_all();
    sub->add_option("--out", out_dir, "output directory (default: config output_dir)");
    sub->add_option("--seed", seed, "override base_seed")->each([&](const std::string&) {
      have_seed = true;
    });
    if (with_threads)
      sub->add_option("--threads", threads, "parallel paths; output-invariant")
          ->check(CLI::PositiveNumber);
  };

  CLI::App* evolve = app.add_subcommand("evolve", "one deterministic trajectory");
  CLI::App* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble of pathwise solves");
  CLI::App* constants = app.add_subcommand("constants", "emit the constant set with provenance");
  CLI::App* verify = app.add_subcommand("verify", "check every bound against ensemble data");
  add_common(evolve, false);
  add_common(ensemble, true);
  add_common(constants, false);
  add_common(verify, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (have_seed) overrides.push_back("base_seed=" + std::to_string(seed));
    const plap::ExperimentConfig cfg = plap::load_config(config_path, overrides);
    const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
    if (evolve->parsed()) return plap::cli::cmd_evolve(cfg, dir);
    if (ensemble->parsed()) return plap::cli::cmd_ensemble(cfg, dir, threads);
    if (constants->parsed()) return plap::cli::cmd_constants(cfg, dir);
    if (verify->parsed()) return plap::cli::cmd_verify(cfg, dir);
  } catch (const plap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plap/semigroup.hpp"

// Sampling of random weight fields g(omega) in [g1, g2] and random initial
// data u(omega), plus pathwise Monte Carlo ensembles. Each path is one
// deterministic evolve() with frozen samples (gamma, u0), which is exactly
// the pathwise description of the random flow. Everything is a pure function
// of the seeds, so ensembles reproduce bitwise regardless of thread count.

namespace plap {

enum class WeightKind { ClampedLognormal, TwoPointMixture, Constant };
enum class InitKind { BumpSum, GaussianField, SignPattern };

WeightKind weight_kind_from_string(const std::string& s);
std::string to_string(WeightKind k);
InitKind init_kind_from_string(const std::string& s);
std::string to_string(InitKind k);

struct RandomWeightModel {
  WeightKind kind = WeightKind::ClampedLognormal;
  double g1 = 0.5;
  double g2 = 2.0;
  double correlation_length = 0.3;
  void validate() const;
};

struct RandomInitModel {
  InitKind kind = InitKind::BumpSum;
  double amplitude = 1.0;
  std::optional<double> k_trunc;  // apply tau_k after synthesis when set
  void validate() const;
};

// Deterministic in (model, domain, seed); every face lands in [g1, g2].
WeightField sample_weight(const RandomWeightModel& model, const GridDomain& domain, uint64_t seed);

// Deterministic in (model, domain, seed); truncation applied last.
ScalarField sample_initial(const RandomInitModel& model, const GridDomain& domain, uint64_t seed);

// Cellwise clamp to [-k, k].
ScalarField truncate(const ScalarField& u, double k);

struct PathStats {
  uint64_t seed = 0;
  double delta_u = 0.0;  // ||u0 - mean||_2^2
  double u0_l1 = 0.0;
  double u0_linf = 0.0;
  double mass_drift = 0.0;
  std::vector<double> dev_l1;    // ||T(t)u - mean||_1 per time
  std::vector<double> dev_linf;  // ||T(t)u - mean||_inf per time
  std::vector<double> sq_dev;    // int (T(t)u - mean)^2 per time
};

struct EnsembleResult {
  uint64_t base_seed = 0;
  int n = 0;
  std::vector<double> t_grid;  // realized snapshot times, shared by all paths
  std::vector<PathStats> paths;
};

// Path i uses seed base_seed + i for both samplers. Any path failure aborts
// with the failing seed in the message. n_threads > 1 distributes paths;
// results are slotted by index, so the output is thread-count invariant.
EnsembleResult run_ensemble(const RandomWeightModel& weight_model, const RandomInitModel& init_model,
                            const GridDomain& domain, const FlowParams& params,
                            std::span<const double> t_grid, int steps_per_unit_time, int n_paths,
                            uint64_t base_seed, int n_threads = 1);

}  // namespace plap

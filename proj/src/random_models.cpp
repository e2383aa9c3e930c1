#include "plap/random_models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "plap/rng.hpp"

namespace plap {

namespace {

constexpr uint32_t kStreamWeight = 1;
constexpr uint32_t kStreamInit = 2;

// Random cosine modes with wave numbers scaled by 1/corr_length give a
// smooth stationary Gaussian-like field with that correlation length.
struct CosineField {
  static constexpr int kModes = 16;
  std::array<double, kModes> kx, ky, phase;

  CosineField(CounterRng& rng, double corr_length) {
    const double scale = 6.283185307179586 / std::max(corr_length, 1e-12);
    for (int m = 0; m < kModes; ++m) {
      kx[m] = scale * rng.normal();
      ky[m] = scale * rng.normal();
      phase[m] = rng.uniform(0.0, 6.283185307179586);
    }
  }

  double operator()(double x, double y) const {
    double s = 0.0;
    for (int m = 0; m < kModes; ++m) s += std::cos(kx[m] * x + ky[m] * y + phase[m]);
    return s * std::sqrt(2.0 / kModes);
  }
};

}  // namespace

WeightKind weight_kind_from_string(const std::string& s) {
  if (s == "clamped-lognormal-field") return WeightKind::ClampedLognormal;
  if (s == "two-point-mixture") return WeightKind::TwoPointMixture;
  if (s == "constant") return WeightKind::Constant;
  throw std::invalid_argument("unknown weight model kind: " + s);
}

std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::ClampedLognormal: return "clamped-lognormal-field";
    case WeightKind::TwoPointMixture: return "two-point-mixture";
    case WeightKind::Constant: return "constant";
  }
  return "?";
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "smooth-random-bump-sum") return InitKind::BumpSum;
  if (s == "gaussian-field") return InitKind::GaussianField;
  if (s == "scaled-sign-pattern") return InitKind::SignPattern;
  throw std::invalid_argument("unknown init model kind: " + s);
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::BumpSum: return "smooth-random-bump-sum";
    case InitKind::GaussianField: return "gaussian-field";
    case InitKind::SignPattern: return "scaled-sign-pattern";
  }
  return "?";
}

void RandomWeightModel::validate() const {
  if (!(g1 > 0.0) || !(g1 <= g2)) throw std::invalid_argument("weight model: requires 0 < g1 <= g2");
  if (!(correlation_length > 0.0))
    throw std::invalid_argument("weight model: correlation_length must be > 0");
}

void RandomInitModel::validate() const {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("init model: amplitude must be >= 0");
  if (k_trunc && !(*k_trunc > 0.0)) throw std::invalid_argument("init model: k_trunc must be > 0");
}

WeightField sample_weight(const RandomWeightModel& model, const GridDomain& domain, uint64_t seed) {
  model.validate();
  WeightField w(domain, model.g1, model.g2, model.g1);
  CounterRng rng(seed, 0, kStreamWeight);
  switch (model.kind) {
    case WeightKind::Constant: {
      const double v = 0.5 * (model.g1 + model.g2);
      std::fill(w.xval.begin(), w.xval.end(), v);
      std::fill(w.yval.begin(), w.yval.end(), v);
      break;
    }
    case WeightKind::TwoPointMixture: {
      const double v = (rng.next_u32() & 1u) ? model.g2 : model.g1;
      std::fill(w.xval.begin(), w.xval.end(), v);
      std::fill(w.yval.begin(), w.yval.end(), v);
      break;
    }
    case WeightKind::ClampedLognormal: {
      const CosineField field(rng, model.correlation_length);
      const double sigma = model.g2 > model.g1 ? 0.5 * std::log(model.g2 / model.g1) : 0.0;
      auto value = [&](double x, double y) {
        const double v = model.g1 * std::exp(sigma * field(x, y));
        return std::clamp(v, model.g1, model.g2);
      };
      for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i + 1 < domain.nx; ++i)
          w.x(i, j) = value((i + 1) * domain.hx, domain.cell_y(j));
      for (int j = 0; j + 1 < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i)
          w.y(i, j) = value(domain.cell_x(i), (j + 1) * domain.hy);
      break;
    }
  }
  return w;
}

ScalarField truncate(const ScalarField& u, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncate: k must be > 0");
  ScalarField out = u;
  for (double& v : out.values) v = std::clamp(v, -k, k);
  return out;
}

ScalarField sample_initial(const RandomInitModel& model, const GridDomain& domain, uint64_t seed) {
  model.validate();
  ScalarField u(domain);
  CounterRng rng(seed, 0, kStreamInit);
  switch (model.kind) {
    case InitKind::BumpSum: {
      constexpr int kBumps = 3;
      for (int b = 0; b < kBumps; ++b) {
        const double cx = rng.uniform(0.0, domain.lx);
        const double cy = rng.uniform(0.0, domain.ly);
        const double r = rng.uniform(0.1, 0.3) * std::min(domain.lx, domain.ly);
        const double amp =
            model.amplitude * rng.uniform(0.5, 1.0) * ((rng.next_u32() & 1u) ? 1.0 : -1.0);
        for (int j = 0; j < domain.ny; ++j)
          for (int i = 0; i < domain.nx; ++i) {
            const double dx = domain.cell_x(i) - cx;
            const double dy = domain.cell_y(j) - cy;
            u(i, j) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * r * r));
          }
      }
      break;
    }
    case InitKind::GaussianField: {
      const CosineField field(rng, 0.25 * std::min(domain.lx, domain.ly));
      for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i)
          u(i, j) = model.amplitude * field(domain.cell_x(i), domain.cell_y(j));
      break;
    }
    case InitKind::SignPattern: {
      for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i)
          u(i, j) = (rng.next_u32() & 1u) ? model.amplitude : -model.amplitude;
      break;
    }
  }
  if (model.k_trunc) u = truncate(u, *model.k_trunc);
  return u;
}

namespace {

PathStats run_one_path(const RandomWeightModel& weight_model, const RandomInitModel& init_model,
                       const GridDomain& domain, const FlowParams& params,
                       std::span<const double> t_grid, int steps_per_unit_time, uint64_t seed,
                       std::vector<double>* realized) {
  const WeightField gamma = sample_weight(weight_model, domain, seed);
  const ScalarField u0 = sample_initial(init_model, domain, seed);

  const double t_end = t_grid.back();
  const int m = std::max(1, static_cast<int>(std::ceil(t_end * steps_per_unit_time)));
  const Trajectory traj = evolve(gamma, u0, t_end, m, params, t_grid);

  PathStats st;
  st.seed = seed;
  const double mean0 = average(u0);
  ScalarField dev0 = u0;
  for (double& v : dev0.values) v -= mean0;
  st.delta_u = lq_norm(dev0, 2.0);
  st.delta_u *= st.delta_u;
  st.u0_l1 = lq_norm(u0, 1.0);
  st.u0_linf = lq_norm(u0, std::numeric_limits<double>::infinity());
  st.mass_drift = traj.mass_drift();
  const double drift_cap = 1e-10 * (1.0 + st.u0_linf);
  if (st.mass_drift > drift_cap)
    throw std::runtime_error("mass conservation violated: drift " + std::to_string(st.mass_drift));

  for (size_t s = 0; s < traj.snapshots.size(); ++s) {
    const ScalarField& ut = traj.snapshots[s];
    ScalarField dev = ut;
    for (double& v : dev.values) v -= mean0;
    st.dev_l1.push_back(lq_norm(dev, 1.0));
    st.dev_linf.push_back(lq_norm(dev, std::numeric_limits<double>::infinity()));
    double sq = lq_norm(dev, 2.0);
    st.sq_dev.push_back(sq * sq);
  }
  if (realized) *realized = traj.snapshot_times;
  return st;
}

}  // namespace

EnsembleResult run_ensemble(const RandomWeightModel& weight_model, const RandomInitModel& init_model,
                            const GridDomain& domain, const FlowParams& params,
                            std::span<const double> t_grid, int steps_per_unit_time, int n_paths,
                            uint64_t base_seed, int n_threads) {
  weight_model.validate();
  init_model.validate();
  params.validate();
  if (n_paths < 1) throw std::invalid_argument("run_ensemble: N must be >= 1");
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()))
    throw std::invalid_argument("run_ensemble: t_grid must be nonempty and increasing");
  if (!(t_grid.back() > 0.0)) throw std::invalid_argument("run_ensemble: needs a positive time");
  if (steps_per_unit_time < 1)
    throw std::invalid_argument("run_ensemble: steps_per_unit_time must be >= 1");

  EnsembleResult ens;
  ens.base_seed = base_seed;
  ens.n = n_paths;
  ens.paths.resize(static_cast<size_t>(n_paths));

  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::string first_error;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_paths) return;
      const uint64_t seed = base_seed + static_cast<uint64_t>(i);
      try {
        std::vector<double> realized;
        ens.paths[static_cast<size_t>(i)] =
            run_one_path(weight_model, init_model, domain, params, t_grid, steps_per_unit_time,
                         seed, i == 0 ? &realized : nullptr);
        if (i == 0) ens.t_grid = std::move(realized);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty())
          first_error = "path " + std::to_string(i) + " (seed " + std::to_string(seed) +
                        "): " + e.what();
      }
    }
  };

  const int threads = std::clamp(n_threads, 1, n_paths);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty()) throw std::runtime_error("run_ensemble: " + first_error);
  return ens;
}

}  // namespace plap

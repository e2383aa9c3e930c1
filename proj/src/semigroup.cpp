#include "plap/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plap {

namespace {

double sq_deviation(const ScalarField& u) {
  const double mean = average(u);
  double s = 0.0;
  for (double v : u.values) s += (v - mean) * (v - mean);
  return s * u.domain.cell_measure();
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  ScalarField d(a.domain);
  for (int c = 0; c < a.size(); ++c) d[c] = a[c] - b[c];
  return lq_norm(d, 1.0);
}

}  // namespace

double Trajectory::mass_drift() const {
  double drift = 0.0;
  for (double m : mass_ledger) drift = std::max(drift, std::abs(m - mass_ledger.front()));
  return drift;
}

Trajectory evolve(const WeightField& gamma, const ScalarField& u0, double t_end, int m,
                  const FlowParams& params, std::span<const double> snapshot_times) {
  require_same_grid(gamma.domain, u0.domain, "evolve");
  params.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve: t_end must be > 0");
  if (m < 1) throw std::invalid_argument("evolve: step count must be >= 1");

  Trajectory traj;
  traj.domain = u0.domain;
  traj.params = params;
  traj.gamma = gamma;
  traj.dt = t_end / m;

  // Requested snapshot times mapped to nearest completed steps.
  std::vector<int> snap_steps;
  snap_steps.reserve(snapshot_times.size());
  for (double t : snapshot_times) {
    int k = static_cast<int>(std::llround(t / traj.dt));
    snap_steps.push_back(std::clamp(k, 0, m));
  }
  traj.snapshots.resize(snap_steps.size());
  traj.snapshot_times.resize(snap_steps.size());

  ScalarField u = u0;
  auto record_ledgers = [&](int k) {
    traj.step_times.push_back(k * traj.dt);
    traj.mass_ledger.push_back(average(u));
    traj.sq_deviation_ledger.push_back(sq_deviation(u));
    traj.dissipation_ledger.push_back(2.0 * params.p * energy(gamma, u, params));
  };
  auto record_snapshots = [&](int k) {
    for (size_t s = 0; s < snap_steps.size(); ++s)
      if (snap_steps[s] == k) {
        traj.snapshots[s] = u;
        traj.snapshot_times[s] = k * traj.dt;
      }
  };

  record_ledgers(0);
  record_snapshots(0);
  for (int k = 1; k <= m; ++k) {
    try {
      u = resolve(gamma, traj.dt, u, params);
    } catch (const SolveError& e) {
      throw SolveError("evolve: step " + std::to_string(k) + " of " + std::to_string(m) + ": " +
                           e.what(),
                       e.residual, e.iterations);
    }
    record_ledgers(k);
    record_snapshots(k);
  }
  traj.final_state = u;
  return traj;
}

std::vector<std::pair<int, double>> exponential_formula_study(const WeightField& gamma,
                                                              const ScalarField& u0, double t,
                                                              std::span<const int> m_list,
                                                              const FlowParams& params) {
  if (m_list.empty()) throw std::invalid_argument("exponential_formula_study: empty m_list");
  if (!std::is_sorted(m_list.begin(), m_list.end()))
    throw std::invalid_argument("exponential_formula_study: m_list must be increasing");
  const int m_ref = 8 * m_list.back();
  const ScalarField ref = evolve(gamma, u0, t, m_ref, params).final_state;
  std::vector<std::pair<int, double>> out;
  out.reserve(m_list.size());
  for (int m : m_list) {
    const ScalarField um = evolve(gamma, u0, t, m, params).final_state;
    out.emplace_back(m, l1_distance(um, ref));
  }
  return out;
}

double dissipation_identity_check(const Trajectory& traj) {
  const size_t n = traj.step_times.size();
  if (n < 3) throw std::invalid_argument("dissipation_identity_check: needs at least 2 steps");
  double worst = 0.0;
  for (size_t k = 0; k + 1 < n; ++k) {
    const double rate = (traj.sq_deviation_ledger[k] - traj.sq_deviation_ledger[k + 1]) / traj.dt;
    const double d = traj.dissipation_ledger[k + 1];
    worst = std::max(worst, std::abs(rate - d) / (1.0 + d));
  }
  return worst;
}

double lipschitz_time_check(const WeightField& gamma, const ScalarField& u0, double eps, double t,
                            double h, const FlowParams& params) {
  if (!(eps > 0.0) || !(t >= eps) || !(h > 0.0))
    throw std::invalid_argument("lipschitz_time_check: requires t >= eps > 0 and h > 0");
  // tau <= 0.1 eps keeps both legs in the resolved regime.
  const double tau_cap = 0.1 * eps;
  const int m_t = std::max(1, static_cast<int>(std::ceil(t / tau_cap)));
  const int m_h = std::max(1, static_cast<int>(std::ceil(h / tau_cap)));
  const ScalarField at_t = evolve(gamma, u0, t, m_t, params).final_state;
  const ScalarField at_th = evolve(gamma, at_t, h, m_h, params).final_state;
  const double bound = h * 2.0 / (std::abs(params.p - 2.0) * eps) * lq_norm(u0, 1.0);
  return bound - l1_distance(at_th, at_t);
}

}  // namespace plap

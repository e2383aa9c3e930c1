#pragma once

#include <span>
#include <utility>
#include <vector>

#include "plap/resolvent.hpp"

// Time evolution T(t, gamma) v by implicit Euler with uniform steps, i.e. m
// applications of the resolvent with beta = t/m. This is exactly the
// exponential-formula iterate (Id + (t/m) a(gamma))^(-m) v, so integrator and
// semigroup construction coincide. Ledgers are recorded at every step; field
// snapshots only at the requested times (nearest completed step, reported as
// realized k*tau).

namespace plap {

struct Trajectory {
  GridDomain domain;
  FlowParams params;
  WeightField gamma;
  double dt = 0.0;

  // Per step k = 0..m, at time k*dt.
  std::vector<double> step_times;
  std::vector<double> mass_ledger;          // average(u)
  std::vector<double> sq_deviation_ledger;  // sum (u - mean)^2 |c|
  std::vector<double> dissipation_ledger;   // 2 p J(gamma, u) = 2 int gamma |grad u|^p

  std::vector<double> snapshot_times;  // realized times, parallel to snapshots
  std::vector<ScalarField> snapshots;

  ScalarField final_state;

  double mass_drift() const;  // max |mass - mass(0)| over the ledger
};

Trajectory evolve(const WeightField& gamma, const ScalarField& u0, double t_end, int m,
                  const FlowParams& params, std::span<const double> snapshot_times = {});

// L1 distance at time t between the m-step solution and a reference with
// m_ref = 8 * max(m_list) steps, per entry of m_list.
std::vector<std::pair<int, double>> exponential_formula_study(const WeightField& gamma,
                                                              const ScalarField& u0, double t,
                                                              std::span<const int> m_list,
                                                              const FlowParams& params);

// Max over steps of |(E_k - E_{k+1})/tau - D_{k+1}| / (1 + D_{k+1}) with E the
// squared-deviation ledger and D the dissipation ledger; O(tau) for the
// implicit Euler scheme.
double dissipation_identity_check(const Trajectory& traj);

// h * (2 / (|p-2| eps)) * ||u0||_1  minus  ||T(t+h)u0 - T(t)u0||_1.
// Nonnegative (up to tolerance) for t >= eps.
double lipschitz_time_check(const WeightField& gamma, const ScalarField& u0, double eps, double t,
                            double h, const FlowParams& params);

}  // namespace plap

#include "plap/operator.hpp"

#include <cmath>

#include "face_ops.hpp"

namespace plap {

void FlowParams::validate() const {
  if (!(p > 1.0) || p == 2.0) throw std::invalid_argument("FlowParams: p must lie in (1, inf) \\ {2}");
  if (!(eps_reg >= 0.0)) throw std::invalid_argument("FlowParams: eps_reg must be >= 0");
  if (!(solver_tol > 0.0)) throw std::invalid_argument("FlowParams: solver_tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("FlowParams: max_iter must be >= 1");
}

double energy(const WeightField& gamma, const ScalarField& u, const FlowParams& params) {
  require_same_grid(gamma.domain, u.domain, "energy");
  params.validate();
  const auto faces = detail::face_stencils(u.domain);
  const double e2 = params.eps_reg * params.eps_reg;
  double sum = 0.0;
  for (size_t k = 0; k < faces.size(); ++k) {
    const auto& f = faces[k];
    const double dn = detail::normal_diff(f, u.values);
    const double dt = detail::tangential_diff(f, u.values);
    const double s2 = dn * dn + dt * dt + e2;
    if (s2 == 0.0) continue;
    sum += gamma.face(static_cast<int>(k)) * f.mu * std::pow(s2, 0.5 * params.p);
  }
  return sum / params.p;
}

ScalarField apply_operator(const WeightField& gamma, const ScalarField& u, const FlowParams& params) {
  require_same_grid(gamma.domain, u.domain, "apply_operator");
  params.validate();
  const auto faces = detail::face_stencils(u.domain);
  const double e2 = params.eps_reg * params.eps_reg;
  ScalarField out(u.domain);
  for (size_t k = 0; k < faces.size(); ++k) {
    const auto& f = faces[k];
    const double dn = detail::normal_diff(f, u.values);
    const double dt = detail::tangential_diff(f, u.values);
    const double s2 = dn * dn + dt * dt + e2;
    if (s2 == 0.0) continue;  // |x|^(p-2) x := 0 at x = 0
    const double w = gamma.face(static_cast<int>(k)) * f.mu * std::pow(s2, 0.5 * params.p - 1.0);
    const double cn = w * dn * f.inv_h;
    out[f.a] -= cn;
    out[f.b] += cn;
    const double ct = w * dt * f.wt;
    for (int t = 0; t < f.tcount; ++t) {
      out[f.ta[t]] -= ct;
      out[f.tb[t]] += ct;
    }
  }
  const double inv_meas = 1.0 / u.domain.cell_measure();
  for (double& v : out.values) v *= inv_meas;
  return out;
}

double weak_residual(const WeightField& gamma, const ScalarField& f, const ScalarField& fhat,
                     const FlowParams& params, std::span<const ScalarField> testset) {
  require_same_grid(gamma.domain, f.domain, "weak_residual");
  require_same_grid(f.domain, fhat.domain, "weak_residual");
  if (testset.empty()) throw std::invalid_argument("weak_residual: testset must be nonempty");
  params.validate();
  const auto faces = detail::face_stencils(f.domain);
  const double e2 = params.eps_reg * params.eps_reg;
  const double meas = f.domain.cell_measure();
  const double scale = 1.0 + lq_norm(fhat, 1.0);

  double worst = 0.0;
  for (const ScalarField& phi : testset) {
    require_same_grid(f.domain, phi.domain, "weak_residual");
    double lhs = 0.0;
    for (size_t k = 0; k < faces.size(); ++k) {
      const auto& fc = faces[k];
      const double dn = detail::normal_diff(fc, f.values);
      const double dt = detail::tangential_diff(fc, f.values);
      const double s2 = dn * dn + dt * dt + e2;
      if (s2 == 0.0) continue;
      const double w = gamma.face(static_cast<int>(k)) * fc.mu * std::pow(s2, 0.5 * params.p - 1.0);
      lhs += w * (dn * detail::normal_diff(fc, phi.values) +
                  dt * detail::tangential_diff(fc, phi.values));
    }
    double rhs = 0.0;
    for (int c = 0; c < fhat.size(); ++c) rhs += fhat[c] * phi[c];
    rhs *= meas;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst / scale;
}

}  // namespace plap

#include "plap/resolvent.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "face_ops.hpp"

namespace plap {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct Problem {
  const GridDomain* grid;
  const WeightField* gamma;
  double beta;
  double p;
  double eps2;        // eps_reg^2 used in energy/gradient
  double meas;        // cell measure
  std::vector<detail::FaceStencil> faces;
  Vec h;

  double phi(const Vec& f) const {
    double quad = 0.0;
    for (int c = 0; c < f.size(); ++c) {
      const double d = f[c] - h[c];
      quad += d * d;
    }
    double en = 0.0;
    for (size_t k = 0; k < faces.size(); ++k) {
      const auto& fc = faces[k];
      const double dn = (f[fc.b] - f[fc.a]) * fc.inv_h;
      double dt = 0.0;
      for (int t = 0; t < fc.tcount; ++t) dt += f[fc.tb[t]] - f[fc.ta[t]];
      dt *= fc.wt;
      const double s2 = dn * dn + dt * dt + eps2;
      if (s2 > 0.0) en += gamma->face(static_cast<int>(k)) * fc.mu * std::pow(s2, 0.5 * p);
    }
    return 0.5 * quad * meas + beta * en / p;
  }

  // grad Phi with respect to cell values (not divided by cell measure)
  Vec grad(const Vec& f) const {
    Vec g = meas * (f - h);
    for (size_t k = 0; k < faces.size(); ++k) {
      const auto& fc = faces[k];
      const double dn = (f[fc.b] - f[fc.a]) * fc.inv_h;
      double dt = 0.0;
      for (int t = 0; t < fc.tcount; ++t) dt += f[fc.tb[t]] - f[fc.ta[t]];
      dt *= fc.wt;
      const double s2 = dn * dn + dt * dt + eps2;
      if (s2 == 0.0) continue;
      const double w = beta * gamma->face(static_cast<int>(k)) * fc.mu * std::pow(s2, 0.5 * p - 1.0);
      const double cn = w * dn * fc.inv_h;
      g[fc.a] -= cn;
      g[fc.b] += cn;
      const double ct = w * dt * fc.wt;
      for (int t = 0; t < fc.tcount; ++t) {
        g[fc.ta[t]] -= ct;
        g[fc.tb[t]] += ct;
      }
    }
    return g;
  }

  // Relative nonlinear residual ||f + beta a(gamma) f - h||_2 / (1 + ||h||_2)
  // in the L^2(S) norm; equals the measure-weighted norm of grad Phi / meas.
  double residual(const Vec& g, double h_l2) const {
    double s = 0.0;
    for (int c = 0; c < g.size(); ++c) {
      const double r = g[c] / meas;
      s += r * r;
    }
    return std::sqrt(s * meas) / (1.0 + h_l2);
  }

  SpMat hessian(const Vec& f) const {
    const int n = static_cast<int>(f.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(faces.size() * 30 + static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) trips.emplace_back(c, c, meas);
    // Hessian floor keeps the Newton matrix finite when eps_reg is 0; the
    // gradient and residual always use the true eps.
    const double e2h = std::max(eps2, 1e-24);
    std::array<int, 10> idx;
    std::array<double, 10> cn, ct;  // d(dn)/du, d(dt)/du on the stencil support
    for (size_t k = 0; k < faces.size(); ++k) {
      const auto& fc = faces[k];
      const double dn = (f[fc.b] - f[fc.a]) * fc.inv_h;
      double dt = 0.0;
      for (int t = 0; t < fc.tcount; ++t) dt += f[fc.tb[t]] - f[fc.ta[t]];
      dt *= fc.wt;
      const double s2 = dn * dn + dt * dt + e2h;
      const double gmu = beta * gamma->face(static_cast<int>(k)) * fc.mu;
      const double w = gmu * std::pow(s2, 0.5 * p - 1.0);
      const double wp = (p - 2.0) * w / s2;  // d/d(s^2) term, times 2 folded below
      int m = 0;
      auto push = [&](int cell, double dcn, double dct) {
        for (int q = 0; q < m; ++q)
          if (idx[q] == cell) {
            cn[q] += dcn;
            ct[q] += dct;
            return;
          }
        idx[m] = cell;
        cn[m] = dcn;
        ct[m] = dct;
        ++m;
      };
      push(fc.a, -fc.inv_h, 0.0);
      push(fc.b, fc.inv_h, 0.0);
      for (int t = 0; t < fc.tcount; ++t) {
        push(fc.ta[t], 0.0, -fc.wt);
        push(fc.tb[t], 0.0, fc.wt);
      }
      for (int qa = 0; qa < m; ++qa)
        for (int qb = 0; qb < m; ++qb) {
          const double da = dn * cn[qa] + dt * ct[qa];
          const double db = dn * cn[qb] + dt * ct[qb];
          const double v = w * (cn[qa] * cn[qb] + ct[qa] * ct[qb]) + wp * da * db;
          if (v != 0.0) trips.emplace_back(idx[qa], idx[qb], v);
        }
    }
    SpMat hmat(n, n);
    hmat.setFromTriplets(trips.begin(), trips.end());
    return hmat;
  }
};

bool finite(const Vec& v) { return v.allFinite(); }

// Newton with Armijo backtracking from iterate f (in-place). Returns true
// once the relative residual drops below tol.
bool newton(const Problem& prob, Vec& f, double tol, int max_iter, double h_l2, SolveInfo& info) {
  double phi_f = prob.phi(f);
  for (int it = 0; it < max_iter; ++it) {
    Vec g = prob.grad(f);
    if (!finite(g) || !std::isfinite(phi_f))
      throw SolveError("resolve: NaN in iterates (bad eps_reg/step interplay)", info.residual,
                       info.iterations);
    const double res = prob.residual(g, h_l2);
    info.residual = res;
    if (res <= tol) return true;
    ++info.iterations;

    SpMat hmat = prob.hessian(f);
    Eigen::SimplicialLDLT<SpMat> ldlt(hmat);
    Vec dir;
    if (ldlt.info() == Eigen::Success) dir = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !finite(dir))
      dir = -g / prob.meas;  // preconditioned gradient fallback

    double slope = g.dot(dir);
    if (slope >= 0.0) {  // not a descent direction; fall back to steepest descent
      dir = -g / prob.meas;
      slope = g.dot(dir);
    }
    // Near the minimum the true decrease drops below the rounding level of
    // Phi; the allowance keeps Armijo from rejecting those last steps.
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(phi_f) + 1.0);
    double alpha = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vec cand = f + alpha * dir;
      const double phi_c = prob.phi(cand);
      if (std::isfinite(phi_c) && phi_c <= phi_f + 1e-4 * alpha * slope + rounding) {
        f = std::move(cand);
        phi_f = phi_c;
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) return false;  // line search stalled
  }
  Vec g = prob.grad(f);
  info.residual = prob.residual(g, h_l2);
  return info.residual <= tol;
}

}  // namespace

ScalarField resolve(const WeightField& gamma, double beta, const ScalarField& h,
                    const FlowParams& params, SolveInfo* info_out) {
  require_same_grid(gamma.domain, h.domain, "resolve");
  params.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("resolve: beta must be > 0");

  Problem prob;
  prob.grid = &h.domain;
  prob.gamma = &gamma;
  prob.beta = beta;
  prob.p = params.p;
  prob.eps2 = params.eps_reg * params.eps_reg;
  prob.meas = h.domain.cell_measure();
  prob.faces = detail::face_stencils(h.domain);
  prob.h = Eigen::Map<const Vec>(h.values.data(), static_cast<Eigen::Index>(h.values.size()));
  const double h_l2 = lq_norm(h, 2.0);

  SolveInfo info;
  Vec f = prob.h;
  bool ok = newton(prob, f, params.solver_tol, params.max_iter, h_l2, info);

  if (!ok) {
    // eps continuation: solve a strongly regularized problem first and track
    // the minimizer as eps shrinks back to the requested value.
    f = prob.h;
    const double eps_target = prob.eps2;
    double eps_cur = std::max(1e-4, eps_target * 4.0);
    while (eps_cur > eps_target && eps_cur > 1e-26) {
      prob.eps2 = eps_cur;
      newton(prob, f, params.solver_tol, params.max_iter, h_l2, info);
      eps_cur = std::max(eps_target, eps_cur * 0.0625);
    }
    prob.eps2 = eps_target;
    ok = newton(prob, f, params.solver_tol, params.max_iter, h_l2, info);
  }

  if (!ok) {
    char res[32];
    std::snprintf(res, sizeof res, "%.3e", info.residual);
    throw SolveError("resolve: no convergence after max_iter (residual " + std::string(res) + ")",
                     info.residual, info.iterations);
  }
  if (info_out) *info_out = info;

  ScalarField out(h.domain);
  Eigen::Map<Vec>(out.values.data(), f.size()) = f;
  return out;
}

double resolvent_contraction_check(const WeightField& gamma, double beta, const ScalarField& h1,
                                   const ScalarField& h2, const FlowParams& params, double q) {
  ScalarField f1 = resolve(gamma, beta, h1, params);
  ScalarField f2 = resolve(gamma, beta, h2, params);
  ScalarField df(h1.domain), dh(h1.domain);
  for (int c = 0; c < h1.size(); ++c) {
    df[c] = f1[c] - f2[c];
    dh[c] = h1[c] - h2[c];
  }
  return lq_norm(df, q) - lq_norm(dh, q);
}

double mean_preservation_check(const WeightField& gamma, double beta, const ScalarField& h,
                               const FlowParams& params) {
  return std::abs(average(resolve(gamma, beta, h, params)) - average(h));
}

double contraction_tolerance(const FlowParams& params) {
  return 1e-8 + 10.0 * std::pow(params.eps_reg, std::min(params.p - 1.0, 1.0));
}

}  // namespace plap

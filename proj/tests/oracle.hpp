#pragma once

// Independent brute-force minimizer of
//   Phi(f) = 1/2 ||f - h||_2^2 + (beta/p) sum_f gamma_f mu_f (s_f^2 + eps^2)^(p/2)
// by cyclic coordinate descent with safeguarded 1-D Newton, run to pointwise
// stationarity |dPhi/df_c| / cellmeasure <= stat_tol. Face geometry and all
// derivatives are re-derived here from the grid definition; nothing is shared
// with the library solver path.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "plap/grid.hpp"

namespace oracle {

struct Face {
  int ca, cb;           // normal pair
  double inv_h;
  std::vector<std::pair<int, int>> tpairs;
  double wt;
  double gamma;
  double mu;
};

inline std::vector<Face> enumerate_faces(const plap::GridDomain& d, const plap::WeightField& g) {
  std::vector<Face> faces;
  auto cell = [&](int i, int j) { return j * d.nx + i; };
  const double mu = 0.5 * d.hx * d.hy;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i + 1 < d.nx; ++i) {
      Face f;
      f.ca = cell(i, j);
      f.cb = cell(i + 1, j);
      f.inv_h = 1.0 / d.hx;
      f.mu = mu;
      f.gamma = g.x(i, j);
      for (int col : {i, i + 1}) {
        if (j + 1 < d.ny) f.tpairs.emplace_back(cell(col, j), cell(col, j + 1));
        if (j - 1 >= 0) f.tpairs.emplace_back(cell(col, j - 1), cell(col, j));
      }
      f.wt = f.tpairs.empty() ? 0.0 : 1.0 / (static_cast<double>(f.tpairs.size()) * d.hy);
      faces.push_back(std::move(f));
    }
  for (int j = 0; j + 1 < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      Face f;
      f.ca = cell(i, j);
      f.cb = cell(i, j + 1);
      f.inv_h = 1.0 / d.hy;
      f.mu = mu;
      f.gamma = g.y(i, j);
      for (int row : {j, j + 1}) {
        if (i + 1 < d.nx) f.tpairs.emplace_back(cell(i, row), cell(i + 1, row));
        if (i - 1 >= 0) f.tpairs.emplace_back(cell(i - 1, row), cell(i, row));
      }
      f.wt = f.tpairs.empty() ? 0.0 : 1.0 / (static_cast<double>(f.tpairs.size()) * d.hx);
      faces.push_back(std::move(f));
    }
  return faces;
}

// dPhi/df_c and its derivative at the current iterate.
inline void coordinate_derivatives(const std::vector<Face>& faces, const std::vector<double>& f,
                                   const std::vector<double>& h, int c, double meas, double beta,
                                   double p, double eps2, double* g_out, double* gp_out) {
  double g = (f[c] - h[c]) * meas;
  double gp = meas;
  for (const Face& fc : faces) {
    double ddn = 0.0;
    if (fc.ca == c) ddn -= fc.inv_h;
    if (fc.cb == c) ddn += fc.inv_h;
    double ddt = 0.0;
    for (const auto& [ta, tb] : fc.tpairs) {
      if (ta == c) ddt -= fc.wt;
      if (tb == c) ddt += fc.wt;
    }
    if (ddn == 0.0 && ddt == 0.0) continue;
    const double dn = (f[fc.cb] - f[fc.ca]) * fc.inv_h;
    double dt = 0.0;
    for (const auto& [ta, tb] : fc.tpairs) dt += f[tb] - f[ta];
    dt *= fc.wt;
    const double z = dn * dn + dt * dt + eps2;
    if (z == 0.0) continue;
    const double w = beta * fc.gamma * fc.mu * std::pow(z, 0.5 * p - 1.0);
    const double dz = dn * ddn + dt * ddt;
    g += w * dz;
    gp += w * (ddn * ddn + ddt * ddt) + (p - 2.0) * w / z * dz * dz;
  }
  *g_out = g;
  if (gp_out) *gp_out = gp;
}

inline std::vector<double> minimize_phi(const plap::GridDomain& d, const plap::WeightField& gamma,
                                        double beta, const std::vector<double>& h, double p,
                                        double eps, double stat_tol = 1e-12,
                                        int max_sweeps = 5000) {
  const auto faces = enumerate_faces(d, gamma);
  const double meas = d.hx * d.hy;
  const double eps2 = eps * eps;
  std::vector<double> f = h;
  const int n = d.nx * d.ny;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int c = 0; c < n; ++c) {
      // Safeguarded 1-D Newton on the strictly increasing map x -> dPhi/df_c.
      double g, gp;
      coordinate_derivatives(faces, f, h, c, meas, beta, p, eps2, &g, &gp);
      if (std::abs(g) / meas <= 0.05 * stat_tol) continue;
      double lo = f[c], hi = f[c];
      double glo = g, ghi = g;
      double step = 1.0 + std::abs(f[c]);
      while (glo > 0.0) {
        lo -= step;
        step *= 2.0;
        f[c] = lo;
        coordinate_derivatives(faces, f, h, c, meas, beta, p, eps2, &glo, nullptr);
      }
      step = 1.0 + std::abs(hi);
      while (ghi < 0.0) {
        hi += step;
        step *= 2.0;
        f[c] = hi;
        coordinate_derivatives(faces, f, h, c, meas, beta, p, eps2, &ghi, nullptr);
      }
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 200; ++it) {
        f[c] = x;
        coordinate_derivatives(faces, f, h, c, meas, beta, p, eps2, &g, &gp);
        if (std::abs(g) / meas <= 0.05 * stat_tol) break;
        if (g > 0.0)
          hi = x;
        else
          lo = x;
        double xn = (gp > 0.0) ? x - g / gp : 0.5 * (lo + hi);
        if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        if (xn == x) break;
        x = xn;
      }
      f[c] = x;
    }
    double worst = 0.0;
    for (int c = 0; c < n; ++c) {
      double g;
      coordinate_derivatives(faces, f, h, c, meas, beta, p, eps2, &g, nullptr);
      worst = std::max(worst, std::abs(g) / meas);
    }
    if (worst <= stat_tol) return f;
  }
  throw std::runtime_error("oracle::minimize_phi: no stationarity after max sweeps");
}

}  // namespace oracle

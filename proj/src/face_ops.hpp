#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "plap/grid.hpp"

// Face stencil data for the energy (1/p) sum_f gamma_f mu_f (s_f^2 + eps^2)^(p/2).
//
// The face speed s_f approximates the full gradient magnitude at the face:
//   s^2 = d_n^2 + d_t^2,
// d_n the two-point normal difference and d_t the mean of the (up to four)
// adjacent tangential differences; at the boundary the mean runs over the
// ones that exist, which keeps s exact on linear fields. Each interior face
// carries the staggered measure mu = hx*hy/2 so that sum_f mu_f ~ area when
// both families are counted.

namespace plap::detail {

struct FaceStencil {
  int a = 0, b = 0;          // normal difference (u[b] - u[a]) * inv_h
  double inv_h = 0.0;
  int tcount = 0;            // tangential pairs, d_t = wt * sum_k (u[tb[k]] - u[ta[k]])
  std::array<int, 4> ta{};
  std::array<int, 4> tb{};
  double wt = 0.0;
  double mu = 0.0;
};

inline std::vector<FaceStencil> face_stencils(const GridDomain& d) {
  std::vector<FaceStencil> out;
  out.reserve(static_cast<size_t>(d.face_count()));
  const double mu = 0.5 * d.hx * d.hy;
  // x-faces, same order as WeightField::xval
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i + 1 < d.nx; ++i) {
      FaceStencil f;
      f.a = d.cell_index(i, j);
      f.b = d.cell_index(i + 1, j);
      f.inv_h = 1.0 / d.hx;
      f.mu = mu;
      auto add = [&](int ii, int jj) {
        if (jj + 1 < d.ny) { f.ta[f.tcount] = d.cell_index(ii, jj); f.tb[f.tcount] = d.cell_index(ii, jj + 1); ++f.tcount; }
      };
      add(i, j);
      if (j > 0) { f.ta[f.tcount] = d.cell_index(i, j - 1); f.tb[f.tcount] = d.cell_index(i, j); ++f.tcount; }
      add(i + 1, j);
      if (j > 0) { f.ta[f.tcount] = d.cell_index(i + 1, j - 1); f.tb[f.tcount] = d.cell_index(i + 1, j); ++f.tcount; }
      f.wt = f.tcount > 0 ? 1.0 / (f.tcount * d.hy) : 0.0;
      out.push_back(f);
    }
  // y-faces, same order as WeightField::yval
  for (int j = 0; j + 1 < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      FaceStencil f;
      f.a = d.cell_index(i, j);
      f.b = d.cell_index(i, j + 1);
      f.inv_h = 1.0 / d.hy;
      f.mu = mu;
      auto add = [&](int ii, int jj) {
        if (ii + 1 < d.nx) { f.ta[f.tcount] = d.cell_index(ii, jj); f.tb[f.tcount] = d.cell_index(ii + 1, jj); ++f.tcount; }
      };
      add(i, j);
      if (i > 0) { f.ta[f.tcount] = d.cell_index(i - 1, j); f.tb[f.tcount] = d.cell_index(i, j); ++f.tcount; }
      add(i, j + 1);
      if (i > 0) { f.ta[f.tcount] = d.cell_index(i - 1, j + 1); f.tb[f.tcount] = d.cell_index(i, j + 1); ++f.tcount; }
      f.wt = f.tcount > 0 ? 1.0 / (f.tcount * d.hx) : 0.0;
      out.push_back(f);
    }
  return out;
}

inline double normal_diff(const FaceStencil& f, const std::vector<double>& u) {
  return (u[static_cast<size_t>(f.b)] - u[static_cast<size_t>(f.a)]) * f.inv_h;
}

inline double tangential_diff(const FaceStencil& f, const std::vector<double>& u) {
  double s = 0.0;
  for (int k = 0; k < f.tcount; ++k)
    s += u[static_cast<size_t>(f.tb[k])] - u[static_cast<size_t>(f.ta[k])];
  return s * f.wt;
}

}  // namespace plap::detail

#include "plap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plap {

GridDomain make_grid(int nx, int ny, double lx, double ly) {
  if (nx < 2) throw std::invalid_argument("make_grid: nx must be >= 2 (gradient undefined)");
  if (ny < 1) throw std::invalid_argument("make_grid: ny must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("make_grid: side lengths must be positive");
  GridDomain d;
  d.nx = nx;
  d.ny = ny;
  d.lx = lx;
  d.ly = ly;
  d.hx = lx / nx;
  d.hy = ly / ny;
  d.area = lx * ly;
  d.diam = std::sqrt(lx * lx + ly * ly);
  return d;
}

WeightField::WeightField(const GridDomain& d, double lo, double hi, double fill)
    : domain(d),
      g1(lo),
      g2(hi),
      xval(static_cast<size_t>(d.xface_count()), fill),
      yval(static_cast<size_t>(d.yface_count()), fill) {
  if (!(g1 > 0.0) || !(g1 <= g2)) throw std::invalid_argument("WeightField: requires 0 < g1 <= g2");
  if (fill < g1 || fill > g2) throw std::invalid_argument("WeightField: fill value outside [g1, g2]");
}

void WeightField::check_bounds() const {
  auto in_range = [&](double v) { return v >= g1 && v <= g2; };
  if (!std::all_of(xval.begin(), xval.end(), in_range) ||
      !std::all_of(yval.begin(), yval.end(), in_range))
    throw std::invalid_argument("WeightField: value outside [g1, g2]");
}

WeightField uniform_weight(const GridDomain& d, double value) {
  return WeightField(d, value, value, value);
}

double average(const ScalarField& u) {
  double s = 0.0;
  for (double v : u.values) s += v;
  return s * u.domain.cell_measure() / u.domain.area;
}

double lq_norm(const ScalarField& u, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1 or infinity");
  double s = 0.0;
  for (double v : u.values) s += std::pow(std::abs(v), q);
  return std::pow(s * u.domain.cell_measure(), 1.0 / q);
}

FaceVectorField gradient(const ScalarField& u) {
  const GridDomain& d = u.domain;
  FaceVectorField g(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i + 1 < d.nx; ++i)
      g.x(i, j) = (u(i + 1, j) - u(i, j)) / d.hx;
  for (int j = 0; j + 1 < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      g.y(i, j) = (u(i, j + 1) - u(i, j)) / d.hy;
  return g;
}

ScalarField neumann_divergence(const FaceVectorField& flux) {
  const GridDomain& d = flux.domain;
  ScalarField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i + 1 < d.nx; ++i) {
      const double f = flux.x(i, j) / d.hx;
      out(i, j) += f;
      out(i + 1, j) -= f;
    }
  for (int j = 0; j + 1 < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const double f = flux.y(i, j) / d.hy;
      out(i, j) += f;
      out(i, j + 1) -= f;
    }
  return out;
}

}  // namespace plap

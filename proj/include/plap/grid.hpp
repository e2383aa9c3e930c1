#pragma once

#include <stdexcept>
#include <vector>

// Uniform cell-centered rectangular grid with zero-flux (Neumann) boundary.
// Cells are indexed row-major: cell (i, j) -> j * nx + i.
// Interior x-faces sit between cells (i, j) and (i+1, j); interior y-faces
// between (i, j) and (i, j+1). Boundary faces carry no flux and are never
// stored, so the zero normal-flux condition holds by construction.

namespace plap {

struct GridDomain {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double area = 0.0;
  double diam = 0.0;

  int cell_count() const { return nx * ny; }
  int xface_count() const { return (nx - 1) * ny; }
  int yface_count() const { return nx * (ny - 1); }
  int face_count() const { return xface_count() + yface_count(); }
  double cell_measure() const { return hx * hy; }

  int cell_index(int i, int j) const { return j * nx + i; }
  double cell_x(int i) const { return (i + 0.5) * hx; }
  double cell_y(int j) const { return (j + 0.5) * hy; }

  bool operator==(const GridDomain& o) const {
    return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
  }
};

// Rejects nx < 2 (no x-faces, gradient undefined) and non-positive lengths.
// ny = 1 is accepted: the grid degenerates to a 1-D strip with y-face count 0.
GridDomain make_grid(int nx, int ny, double lx, double ly);

// One real value per cell.
struct ScalarField {
  GridDomain domain;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridDomain& d, double fill = 0.0)
      : domain(d), values(static_cast<size_t>(d.cell_count()), fill) {}

  double& operator()(int i, int j) { return values[static_cast<size_t>(domain.cell_index(i, j))]; }
  double operator()(int i, int j) const { return values[static_cast<size_t>(domain.cell_index(i, j))]; }
  double& operator[](int c) { return values[static_cast<size_t>(c)]; }
  double operator[](int c) const { return values[static_cast<size_t>(c)]; }
  int size() const { return static_cast<int>(values.size()); }
};

// Normal components on interior faces; x-faces first, then y-faces.
// x-face (i, j)-(i+1, j) -> j * (nx-1) + i; y-face (i, j)-(i, j+1) -> j * nx + i.
struct FaceVectorField {
  GridDomain domain;
  std::vector<double> xval;
  std::vector<double> yval;

  FaceVectorField() = default;
  explicit FaceVectorField(const GridDomain& d, double fill = 0.0)
      : domain(d),
        xval(static_cast<size_t>(d.xface_count()), fill),
        yval(static_cast<size_t>(d.yface_count()), fill) {}

  double& x(int i, int j) { return xval[static_cast<size_t>(j * (domain.nx - 1) + i)]; }
  double x(int i, int j) const { return xval[static_cast<size_t>(j * (domain.nx - 1) + i)]; }
  double& y(int i, int j) { return yval[static_cast<size_t>(j * domain.nx + i)]; }
  double y(int i, int j) const { return yval[static_cast<size_t>(j * domain.nx + i)]; }
};

// Face-valued weight confined to [g1, g2] with 0 < g1 <= g2.
struct WeightField {
  GridDomain domain;
  double g1 = 0.0;
  double g2 = 0.0;
  std::vector<double> xval;
  std::vector<double> yval;

  WeightField() = default;
  WeightField(const GridDomain& d, double lo, double hi, double fill);

  double& x(int i, int j) { return xval[static_cast<size_t>(j * (domain.nx - 1) + i)]; }
  double x(int i, int j) const { return xval[static_cast<size_t>(j * (domain.nx - 1) + i)]; }
  double& y(int i, int j) { return yval[static_cast<size_t>(j * domain.nx + i)]; }
  double y(int i, int j) const { return yval[static_cast<size_t>(j * domain.nx + i)]; }

  // Flat face index: x-faces [0, xface_count), then y-faces.
  double face(int k) const {
    const int nxf = domain.xface_count();
    return k < nxf ? xval[static_cast<size_t>(k)] : yval[static_cast<size_t>(k - nxf)];
  }
  void check_bounds() const;  // throws if any value leaves [g1, g2]
};

// Constant weight gamma == value on every interior face.
WeightField uniform_weight(const GridDomain& d, double value);

// (1/area) * sum_c u_c * |c|.
double average(const ScalarField& u);

// Discrete L^q norm, q in [1, inf]: (sum |u|^q |c|)^(1/q), max |u| for q = inf.
// Pass std::numeric_limits<double>::infinity() for the sup norm.
double lq_norm(const ScalarField& u, double q);

// Two-point difference across each interior face divided by face-normal spacing.
FaceVectorField gradient(const ScalarField& u);

// Discrete divergence, adjoint of gradient() under the cell/face quadrature,
// with zero flux through the boundary. Cell means of the result vanish to
// rounding, which is the discrete footprint of the Neumann condition.
ScalarField neumann_divergence(const FaceVectorField& flux);

inline void require_same_grid(const GridDomain& a, const GridDomain& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

}  // namespace plap

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "plap/operator.hpp"
#include "plap/rng.hpp"

using namespace plap;

namespace {

ScalarField random_field(const GridDomain& d, uint64_t seed) {
  CounterRng rng(seed, 0, 99);
  ScalarField u(d);
  for (double& v : u.values) v = rng.normal();
  return u;
}

WeightField random_weight(const GridDomain& d, uint64_t seed, double g1 = 0.5, double g2 = 2.0) {
  CounterRng rng(seed, 1, 99);
  WeightField w(d, g1, g2, g1);
  for (double& v : w.xval) v = rng.uniform(g1, g2);
  for (double& v : w.yval) v = rng.uniform(g1, g2);
  return w;
}

ScalarField linear_x(const GridDomain& d) {
  ScalarField u(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) u(i, j) = d.cell_x(i);
  return u;
}

double inner(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (int c = 0; c < a.size(); ++c) s += a[c] * b[c];
  return s * a.domain.cell_measure();
}

}  // namespace

TEST_CASE("energy: constants, exact integral, homogeneity") {
  FlowParams params;
  params.p = 1.5;
  params.eps_reg = 0.0;

  const GridDomain d = make_grid(8, 8, 1.0, 1.0);
  const WeightField one = uniform_weight(d, 1.0);
  CHECK(energy(one, ScalarField(d, 4.2), params) == doctest::Approx(0.0));

  // u(x,y) = x with gamma = 1 has (1/p) int |grad u|^p = 1/p; the discrete
  // value misses only the boundary face fraction, which shrinks like 1/n.
  double prev_err = 1e9;
  for (int n : {8, 16, 32}) {
    const GridDomain dn = make_grid(n, n, 1.0, 1.0);
    const double e = energy(uniform_weight(dn, 1.0), linear_x(dn), params);
    const double err = std::abs(e - 1.0 / params.p);
    CHECK(err < prev_err);
    CHECK(err <= 2.0 / n);
    prev_err = err;
  }

  // p-homogeneity at eps = 0
  for (double p : {1.5, 3.0}) {
    params.p = p;
    const GridDomain dg = make_grid(5, 4, 1.0, 0.8);
    const WeightField w = random_weight(dg, 7);
    const ScalarField u = random_field(dg, 8);
    ScalarField cu = u;
    for (double& v : cu.values) v *= -3.0;
    CHECK(energy(w, cu, params) ==
          doctest::Approx(std::pow(3.0, p) * energy(w, u, params)).epsilon(1e-12));
  }
}

TEST_CASE("apply_operator: kernel and mean-zero range") {
  FlowParams params;
  params.p = 1.5;
  const GridDomain d = make_grid(6, 5, 1.0, 1.3);
  const WeightField w = random_weight(d, 3);

  const ScalarField zero = apply_operator(w, ScalarField(d, -1.7), params);
  for (double v : zero.values) CHECK(v == doctest::Approx(0.0));

  for (double p : {1.5, 3.0}) {
    params.p = p;
    for (uint64_t s = 0; s < 5; ++s) {
      const ScalarField u = random_field(d, 10 + s);
      const ScalarField au = apply_operator(w, u, params);
      double linf = 0.0;
      for (double v : u.values) linf = std::max(linf, std::abs(v));
      CHECK(std::abs(average(au)) <= 1e-12 * (1.0 + linf));
    }
  }
}

TEST_CASE("apply_operator is the gradient of the energy") {
  // central finite differences of the energy against the operator pairing,
  // on >= 20 random 4x4 fields; the defect must shrink like delta^2
  const GridDomain d = make_grid(4, 4, 1.0, 1.0);
  for (double p : {1.5, 3.0}) {
    FlowParams params;
    params.p = p;
    params.eps_reg = 1e-3;  // smooth regime so the quadratic remainder dominates
    for (uint64_t s = 0; s < 20; ++s) {
      const WeightField w = random_weight(d, 300 + s);
      const ScalarField u = random_field(d, 400 + s);
      const ScalarField dir = random_field(d, 500 + s);
      const ScalarField au = apply_operator(w, u, params);
      const double pairing = inner(au, dir);

      auto fd = [&](double delta) {
        ScalarField up = u, um = u;
        for (int c = 0; c < u.size(); ++c) {
          up[c] += delta * dir[c];
          um[c] -= delta * dir[c];
        }
        return (energy(w, up, params) - energy(w, um, params)) / (2.0 * delta);
      };
      const double e1 = std::abs(fd(1e-4) - pairing);
      const double e2 = std::abs(fd(5e-5) - pairing);
      const double scale = std::abs(pairing) + 1.0;
      CHECK(e1 / scale <= 1e-6);
      // quadratic decay, allowing rounding floor
      CHECK(e2 <= 0.3 * e1 + 1e-11 * scale);
    }
  }
}

TEST_CASE("monotonicity of the operator at eps = 0") {
  const GridDomain d = make_grid(5, 5, 1.0, 1.0);
  for (double p : {1.5, 3.0}) {
    FlowParams params;
    params.p = p;
    params.eps_reg = 0.0;
    for (uint64_t s = 0; s < 20; ++s) {
      const WeightField w = random_weight(d, 600 + s);
      const ScalarField u = random_field(d, 700 + s);
      const ScalarField v = random_field(d, 800 + s);
      const ScalarField au = apply_operator(w, u, params);
      const ScalarField av = apply_operator(w, v, params);
      ScalarField da(d), duv(d);
      for (int c = 0; c < d.cell_count(); ++c) {
        da[c] = au[c] - av[c];
        duv[c] = u[c] - v[c];
      }
      CHECK(inner(da, duv) >= -1e-12);
    }
  }
}

TEST_CASE("weak_residual") {
  const GridDomain d = make_grid(4, 4, 1.0, 1.0);
  FlowParams params;
  params.p = 1.5;
  const WeightField w = random_weight(d, 21);

  // canonical cell indicator basis
  std::vector<ScalarField> basis;
  for (int c = 0; c < d.cell_count(); ++c) {
    ScalarField phi(d);
    phi[c] = 1.0;
    basis.push_back(phi);
  }

  CHECK(weak_residual(w, ScalarField(d, 2.0), ScalarField(d), params, basis) ==
        doctest::Approx(0.0));

  const ScalarField f = random_field(d, 22);
  const ScalarField fhat = apply_operator(w, f, params);
  CHECK(weak_residual(w, f, fhat, params, basis) <= 1e-12);

  // perturb fhat by +1 on one cell; the indicator of that cell sees exactly
  // cellmeasure/(1 + ||fhat||_1)
  ScalarField fpert = fhat;
  fpert[5] += 1.0;
  const double expected = d.cell_measure() / (1.0 + lq_norm(fpert, 1.0));
  std::vector<ScalarField> single{basis[5]};
  CHECK(weak_residual(w, f, fpert, params, single) == doctest::Approx(expected).epsilon(1e-10));

  CHECK_THROWS_AS(weak_residual(w, f, fhat, params, std::span<const ScalarField>{}),
                  std::invalid_argument);
}

TEST_CASE("flow params validation") {
  FlowParams params;
  params.p = 2.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params.p = 0.9;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params.p = 1.5;
  params.solver_tol = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params.solver_tol = 1e-10;
  CHECK_NOTHROW(params.validate());
  CHECK(params.holder_conjugate() == doctest::Approx(3.0));
}

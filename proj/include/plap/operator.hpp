#pragma once

#include <span>

#include "plap/grid.hpp"

// Discrete weighted p-Laplacian in divergence form. The primitive object is
// the convex face energy
//
//   J(u) = (1/p) sum_f gamma_f mu_f (|grad u|_f^2 + eps_reg^2)^(p/2),
//
// and apply_operator returns its exact gradient with respect to cell values
// divided by the cell measure. With eps_reg = 0 this is the discrete
// a(gamma)u = -div(gamma |grad u|^(p-2) grad u); constants are in its kernel
// and its range has zero mean, so the flow u' = -a(gamma)u conserves mass.

namespace plap {

struct FlowParams {
  double p = 1.5;            // exponent in (1, inf), p != 2
  double eps_reg = 1e-8;     // gradient regularization in (|grad u|^2 + eps^2)^((p-2)/2)
  double solver_tol = 1e-10; // relative nonlinear residual for resolvent solves
  int max_iter = 200;

  double holder_conjugate() const { return p / (p - 1.0); }
  void validate() const;
};

double energy(const WeightField& gamma, const ScalarField& u, const FlowParams& params);

ScalarField apply_operator(const WeightField& gamma, const ScalarField& u, const FlowParams& params);

// Max over test functions phi of the weak-form defect
//   | sum_f gamma w_f (grad u . grad phi)_f mu_f - sum_c fhat_c phi_c |c| |
// normalized by 1 + ||fhat||_1. Zero (to rounding) when fhat = a(gamma)f.
double weak_residual(const WeightField& gamma, const ScalarField& f, const ScalarField& fhat,
                     const FlowParams& params, std::span<const ScalarField> testset);

}  // namespace plap

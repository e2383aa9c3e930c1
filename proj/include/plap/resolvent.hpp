#pragma once

#include <stdexcept>
#include <string>

#include "plap/operator.hpp"

// Resolvent of the discrete operator: solve f + beta a(gamma) f = h by
// minimizing the strictly convex functional
//
//   Phi(f) = 1/2 ||f - h||_2^2 + beta J(gamma, f),
//
// damped Newton with Armijo backtracking, warm-started by two lagged-
// diffusivity (Kacanov) sweeps; falls back to an eps continuation schedule
// when the direct solve stalls. One resolve is one implicit Euler step of
// the flow and one factor of the exponential formula.

namespace plap {

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& msg, double residual_achieved, int iterations_used)
      : std::runtime_error(msg), residual(residual_achieved), iterations(iterations_used) {}
  double residual;
  int iterations;
};

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;
};

ScalarField resolve(const WeightField& gamma, double beta, const ScalarField& h,
                    const FlowParams& params, SolveInfo* info = nullptr);

// lq_norm(resolve(h1) - resolve(h2), q) - lq_norm(h1 - h2, q); accretivity
// puts this at <= 0 up to solver and regularization bias.
double resolvent_contraction_check(const WeightField& gamma, double beta, const ScalarField& h1,
                                   const ScalarField& h2, const FlowParams& params, double q);

// |average(resolve(gamma, beta, h)) - average(h)|; exact to rounding because
// constants pair to zero against the operator (phi = 1 in the weak form).
double mean_preservation_check(const WeightField& gamma, double beta, const ScalarField& h,
                               const FlowParams& params);

// Tolerance for contraction/order checks: 1e-8 + 10 eps^min(p-1, 1) absorbs
// the regularization bias; the eps = 0 scheme satisfies the inequalities
// exactly.
double contraction_tolerance(const FlowParams& params);

}  // namespace plap

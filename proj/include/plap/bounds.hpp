#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plap/random_models.hpp"

// Explicit constants and the quantitative inequalities they feed:
//
//   L1 decay      ||T(t)u - mean||_1 <= C_{S,1} area^((p-1)/p)
//                        (2/(g1 |p-2|))^(1/p) Delta_u^(1/p) t^(-1/p)
//   Linf decay    (p > 2, delta in (1, p-1)) with
//                        C*_{S,delta} = Ct_{S,1+delta} (C_{S,1+delta}^(1+delta)+1)^(1/(1+delta))
//   log decay     log(int (T(t)v - mean)^2 + 1) <= 2 dv exp(-C* t / (1 + dv^2)),
//                        C* = p / max(Ct_{S,m}^2 (C_{S,m}^m+1)^(2/m) g1^(-2/p) area^((p-m)/p), 1),
//                        m = 2n/(n+2) = 1 at n = 2
//   tail bounds   three Markov-type bounds on P(int (T(t)u - mean)^2 > alpha)
//
// Poincare constants in L1/L2 are analytic for rectangles (diam/2 and
// max(lx,ly)/pi); the remaining constants are discrete Rayleigh-quotient
// estimates times a safety factor 2, tagged "estimated".

namespace plap {

enum class Provenance { Analytic, Estimated };

struct TaggedConstant {
  double value = 0.0;
  Provenance provenance = Provenance::Analytic;
};

struct ConstantSet {
  TaggedConstant c_poincare_l1;                       // C_{S,1}
  TaggedConstant c_poincare_l2;                       // C_{S,2}
  std::optional<TaggedConstant> c_poincare_l1pd;      // C_{S,1+delta}
  TaggedConstant c_embed_w1m_l2;                      // Ct_{S,m}, m = 1: W^{1,1} -> L^2
  std::optional<TaggedConstant> c_embed_w11pd_linf;   // Ct_{S,1+delta}: W^{1,1+delta} -> Linf
  std::optional<double> delta;
  double p = 0.0;
  double g1 = 0.0;
  double area = 0.0;
  TaggedConstant c_star;
};

// ||u - average(u)||_2^2, the driver of every decay and tail bound.
double delta_u(const ScalarField& u);

// Discrete Rayleigh-quotient suprema (before the safety factor); exposed so
// audits can compare them against the analytic rectangle values.
double rayleigh_poincare(const GridDomain& domain, double q);
double rayleigh_embed_w1m_l2(const GridDomain& domain);
double rayleigh_embed_w1q_linf(const GridDomain& domain, double q);

// Analytic entries for the rectangle; estimated entries by subgradient ascent
// on the defining Rayleigh quotients (>= 32 random starts plus near-extremal
// profiles), times safety factor 2. delta must lie in (n-1, p-1) = (1, p-1)
// and needs p > 2.
ConstantSet estimate_constants(const GridDomain& domain, const FlowParams& params, double g1,
                               std::optional<double> delta);

// Recompute C* from the stored components (used to cross-check determinism).
double compute_c_star(const ConstantSet& consts);

double l1_decay_bound(double t, double du, double p, double g1, const GridDomain& domain,
                      const ConstantSet& consts);

// Requires p > n = 2 and delta in (n-1, p-1); bounds ||T(t)u - mean||_inf.
double linf_decay_bound(double t, double du, double p, double delta, double g1,
                        const GridDomain& domain, const ConstantSet& consts);

// Requires p in (1, 2); dv = ||v - mean||_2. Bounds log(int (T(t)v-mean)^2 + 1).
double log_decay_bound(double t, double dv, const ConstantSet& consts);

enum class TailKind { Basic, Poly, Exp };

struct Moments {
  double e_du = 0.0;         // mean Delta_u
  double e_exp_decay = 0.0;  // mean exp(-2 t C* / (1 + Delta_u))
  double e_pow = 0.0;        // mean (1 + Delta_u)^(2r)
  double e_exp_eps = 0.0;    // mean exp(eps Delta_u)
};

Moments estimate_moments(const EnsembleResult& ens, double t, double r, double eps,
                         const ConstantSet& consts);

// param is r for Poly, eps for Exp, unused for Basic.
double tail_bound(TailKind kind, double t, double alpha, double param, const Moments& moments,
                  const ConstantSet& consts);

struct TailEstimate {
  double fraction = 0.0;
  double ci_halfwidth = 0.0;          // 1.96 sqrt(f(1-f)/N)
  double clopper_pearson_upper = 0.0; // exact-binomial 95% upper limit
};

// Fraction of paths with int (T(t)u - mean)^2 > alpha at a sampled time t.
TailEstimate empirical_tail(const EnsembleResult& ens, double t, double alpha);

struct BoundRow {
  std::string name;
  double t = 0.0;
  std::optional<double> alpha;
  std::optional<double> param;   // r, eps or delta
  double bound = 0.0;
  double empirical = 0.0;
  double margin = 0.0;           // allowed - empirical; pass iff >= 0
  bool applicable = true;
  bool pass = true;
  std::optional<double> ci_halfwidth;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  bool all_pass() const;
};

struct VerifyOptions {
  std::vector<double> r_list{1.0, 2.0};
  std::vector<double> eps_list{0.5};
  std::optional<double> delta;
  std::vector<double> alpha_grid{0.05, 0.2, 1.0};
  double margin_rel = 0.05;  // pathwise rows pass at bound*(1+margin_rel)+margin_abs
  double margin_abs = 1e-8;
};

// Pathwise rows (L1, log-decay, Linf) are checked per path; probabilistic
// rows against tail_bound + Clopper-Pearson allowance. Rows outside the p
// regime are reported not-applicable rather than failed.
BoundReport verify(const EnsembleResult& ens, const ConstantSet& consts, const FlowParams& params,
                   const GridDomain& domain, double g1, const VerifyOptions& options);

std::string format_report(const BoundReport& report);

}  // namespace plap

#include "plap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "face_ops.hpp"
#include "plap/rng.hpp"

namespace plap {

double delta_u(const ScalarField& u) {
  const double mean = average(u);
  double s = 0.0;
  for (double v : u.values) s += (v - mean) * (v - mean);
  return s * u.domain.cell_measure();
}

// ---------------------------------------------------------------------------
// Discrete Rayleigh-quotient estimation for the constants the paper leaves
// abstract. Subgradient ascent on log N(v) - log D(v) from structured and
// random starts; scale invariance lets us renormalize every iteration.
// ---------------------------------------------------------------------------

namespace {

using Field = std::vector<double>;

struct QuotientParts {
  double value = 0.0;
  Field grad;  // gradient of log(value)
};

// sum_c |v_c|^q meas and its gradient.
double cell_pow_sum(const GridDomain& d, const Field& v, double q, Field* grad) {
  const double meas = d.cell_measure();
  double s = 0.0;
  for (size_t c = 0; c < v.size(); ++c) {
    const double a = std::abs(v[c]);
    s += std::pow(a, q) * meas;
    if (grad) (*grad)[c] += q * meas * (a > 0.0 ? std::pow(a, q - 1.0) * (v[c] > 0 ? 1.0 : -1.0) : 0.0);
  }
  return s;
}

// sum_f s_f^q mu_f and its gradient, s_f the full face speed.
double face_pow_sum(const std::vector<detail::FaceStencil>& faces, const Field& v, double q,
                    Field* grad) {
  double s = 0.0;
  for (const auto& f : faces) {
    const double dn = detail::normal_diff(f, v);
    const double dt = detail::tangential_diff(f, v);
    const double sp = std::sqrt(dn * dn + dt * dt);
    if (sp == 0.0) continue;
    s += std::pow(sp, q) * f.mu;
    if (grad) {
      const double w = q * f.mu * std::pow(sp, q - 2.0);
      const double cn = w * dn * f.inv_h;
      (*grad)[static_cast<size_t>(f.a)] -= cn;
      (*grad)[static_cast<size_t>(f.b)] += cn;
      const double ct = w * dt * f.wt;
      for (int t = 0; t < f.tcount; ++t) {
        (*grad)[static_cast<size_t>(f.ta[t])] -= ct;
        (*grad)[static_cast<size_t>(f.tb[t])] += ct;
      }
    }
  }
  return s;
}

void remove_mean(const GridDomain& d, Field& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  (void)d;
}

void normalize(Field& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double n = std::sqrt(n2);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

std::vector<Field> ascent_starts(const GridDomain& d) {
  std::vector<Field> starts;
  const int n = d.cell_count();
  auto from = [&](const std::function<double(double, double)>& f) {
    Field v(static_cast<size_t>(n));
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        v[static_cast<size_t>(d.cell_index(i, j))] = f(d.cell_x(i), d.cell_y(j));
    starts.push_back(std::move(v));
  };
  const double pi = std::numbers::pi;
  from([&](double x, double) { return x; });
  from([&](double, double y) { return y; });
  from([&](double x, double y) { return x + y; });
  from([&](double x, double) { return std::cos(pi * x / d.lx); });
  from([&](double, double y) { return std::cos(pi * y / d.ly); });
  from([&](double x, double y) { return std::cos(pi * x / d.lx) * std::cos(pi * y / d.ly); });
  from([&](double x, double) { return x > 0.5 * d.lx ? 1.0 : -1.0; });
  from([&](double, double y) { return y > 0.5 * d.ly ? 1.0 : -1.0; });
  const double r0 = 0.2 * std::min(d.lx, d.ly);
  from([&](double x, double y) {
    const double dx = x - 0.5 * d.lx, dy = y - 0.5 * d.ly;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * r0 * r0));
  });
  {
    Field spike(static_cast<size_t>(n), 0.0);
    spike[static_cast<size_t>(d.cell_index(d.nx / 2, d.ny / 2))] = 1.0;
    starts.push_back(std::move(spike));
  }
  for (int s = 0; s < 32; ++s) {
    CounterRng rng(2718281828u, static_cast<uint64_t>(s), 3);
    Field v(static_cast<size_t>(n));
    for (auto& x : v) x = rng.normal();
    starts.push_back(std::move(v));
  }
  return starts;
}

double ascend(const GridDomain& d,
              const std::function<QuotientParts(const Field&)>& objective, bool mean_free) {
  double best = 0.0;
  for (Field v : ascent_starts(d)) {
    if (mean_free) remove_mean(d, v);
    normalize(v);
    QuotientParts cur = objective(v);
    if (!std::isfinite(cur.value)) continue;
    double eta = 0.1;
    for (int it = 0; it < 300 && eta > 1e-12; ++it) {
      Field cand = v;
      for (size_t c = 0; c < cand.size(); ++c) cand[c] += eta * cur.grad[c];
      if (mean_free) remove_mean(d, cand);
      normalize(cand);
      const QuotientParts next = objective(cand);
      if (std::isfinite(next.value) && next.value > cur.value) {
        v = std::move(cand);
        cur = next;
        eta *= 1.2;
      } else {
        eta *= 0.5;
      }
    }
    best = std::max(best, cur.value);
  }
  return best;
}

}  // namespace

double rayleigh_poincare(const GridDomain& d, double q) {
  const auto faces = detail::face_stencils(d);
  auto objective = [&](const Field& v) {
    QuotientParts out;
    Field w = v;
    // numerator uses v - mean(v); ascent keeps iterates mean-free already
    Field gn(v.size(), 0.0), gd(v.size(), 0.0);
    const double num_pow = cell_pow_sum(d, w, q, &gn);
    const double den_pow = face_pow_sum(faces, v, q, &gd);
    if (num_pow <= 0.0 || den_pow <= 0.0) return out;
    const double num = std::pow(num_pow, 1.0 / q);
    const double den = std::pow(den_pow, 1.0 / q);
    out.value = num / den;
    out.grad.assign(v.size(), 0.0);
    for (size_t c = 0; c < v.size(); ++c)
      out.grad[c] = gn[c] / (q * num_pow) - gd[c] / (q * den_pow);
    return out;
  };
  return ascend(d, objective, /*mean_free=*/true);
}

double rayleigh_embed_w1m_l2(const GridDomain& d) {
  const auto faces = detail::face_stencils(d);
  auto objective = [&](const Field& v) {
    QuotientParts out;
    Field g2(v.size(), 0.0), g1(v.size(), 0.0), gf(v.size(), 0.0);
    const double num_pow = cell_pow_sum(d, v, 2.0, &g2);
    const double l1 = cell_pow_sum(d, v, 1.0, &g1);
    const double grad1 = face_pow_sum(faces, v, 1.0, &gf);
    const double den = l1 + grad1;
    if (num_pow <= 0.0 || den <= 0.0) return out;
    out.value = std::sqrt(num_pow) / den;
    out.grad.assign(v.size(), 0.0);
    for (size_t c = 0; c < v.size(); ++c)
      out.grad[c] = g2[c] / (2.0 * num_pow) - (g1[c] + gf[c]) / den;
    return out;
  };
  return ascend(d, objective, /*mean_free=*/false);
}

double rayleigh_embed_w1q_linf(const GridDomain& d, double q) {
  const auto faces = detail::face_stencils(d);
  auto objective = [&](const Field& v) {
    QuotientParts out;
    size_t cm = 0;
    double vmax = 0.0;
    for (size_t c = 0; c < v.size(); ++c)
      if (std::abs(v[c]) > vmax) {
        vmax = std::abs(v[c]);
        cm = c;
      }
    Field gq(v.size(), 0.0), gf(v.size(), 0.0);
    const double lq = cell_pow_sum(d, v, q, &gq);
    const double gradq = face_pow_sum(faces, v, q, &gf);
    const double den_pow = lq + gradq;
    if (vmax <= 0.0 || den_pow <= 0.0) return out;
    out.value = vmax / std::pow(den_pow, 1.0 / q);
    out.grad.assign(v.size(), 0.0);
    for (size_t c = 0; c < v.size(); ++c) out.grad[c] = -(gq[c] + gf[c]) / (q * den_pow);
    out.grad[cm] += (v[cm] > 0 ? 1.0 : -1.0) / vmax;
    return out;
  };
  return ascend(d, objective, /*mean_free=*/false);
}

// ---------------------------------------------------------------------------
// Constant set and bound formulas
// ---------------------------------------------------------------------------

double compute_c_star(const ConstantSet& consts) {
  // m = 2n/(n+2) = 1 at n = 2, so C_{S,m} = C_{S,1}.
  const double ct2 = consts.c_embed_w1m_l2.value * consts.c_embed_w1m_l2.value;
  const double poin = consts.c_poincare_l1.value + 1.0;
  const double arg = ct2 * poin * poin * std::pow(consts.g1, -2.0 / consts.p) *
                     std::pow(consts.area, (consts.p - 1.0) / consts.p);
  return consts.p / std::max(arg, 1.0);
}

ConstantSet estimate_constants(const GridDomain& domain, const FlowParams& params, double g1,
                               std::optional<double> delta) {
  params.validate();
  if (!(g1 > 0.0)) throw std::invalid_argument("estimate_constants: g1 must be > 0");
  if (delta) {
    if (!(params.p > 2.0))
      throw std::invalid_argument("estimate_constants: delta path requires p > n = 2");
    if (!(*delta > 1.0) || !(*delta < params.p - 1.0))
      throw std::invalid_argument("estimate_constants: delta must lie in (n-1, p-1) = (1, p-1)");
  }

  ConstantSet cs;
  cs.p = params.p;
  cs.g1 = g1;
  cs.area = domain.area;
  cs.delta = delta;
  // Sharp convex-domain value diam/2 in L1; Neumann eigenvalue max(lx,ly)/pi in L2.
  cs.c_poincare_l1 = {0.5 * domain.diam, Provenance::Analytic};
  cs.c_poincare_l2 = {std::max(domain.lx, domain.ly) / std::numbers::pi, Provenance::Analytic};
  cs.c_embed_w1m_l2 = {2.0 * rayleigh_embed_w1m_l2(domain), Provenance::Estimated};
  if (delta) {
    const double q = 1.0 + *delta;
    cs.c_poincare_l1pd = TaggedConstant{2.0 * rayleigh_poincare(domain, q), Provenance::Estimated};
    cs.c_embed_w11pd_linf =
        TaggedConstant{2.0 * rayleigh_embed_w1q_linf(domain, q), Provenance::Estimated};
  }
  cs.c_star = {compute_c_star(cs), Provenance::Estimated};
  return cs;
}

double l1_decay_bound(double t, double du, double p, double g1, const GridDomain& domain,
                      const ConstantSet& consts) {
  if (!(t > 0.0)) throw std::invalid_argument("l1_decay_bound: t must be > 0");
  return consts.c_poincare_l1.value * std::pow(domain.area, (p - 1.0) / p) *
         std::pow(2.0 / (g1 * std::abs(p - 2.0)), 1.0 / p) * std::pow(du, 1.0 / p) *
         std::pow(1.0 / t, 1.0 / p);
}

double linf_decay_bound(double t, double du, double p, double delta, double g1,
                        const GridDomain& domain, const ConstantSet& consts) {
  if (!(p > 2.0)) throw std::invalid_argument("linf_decay_bound: only valid if p > n = 2");
  if (!(delta > 1.0) || !(delta < p - 1.0))
    throw std::invalid_argument("linf_decay_bound: delta must lie in (1, p-1)");
  if (!(t > 0.0)) throw std::invalid_argument("linf_decay_bound: t must be > 0");
  if (!consts.c_poincare_l1pd || !consts.c_embed_w11pd_linf)
    throw std::invalid_argument("linf_decay_bound: constants missing for the p > 2 regime");
  const double q = 1.0 + delta;
  const double c_star_delta = consts.c_embed_w11pd_linf->value *
                              std::pow(std::pow(consts.c_poincare_l1pd->value, q) + 1.0, 1.0 / q);
  return c_star_delta * std::pow(domain.area, 1.0 / q) *
         std::pow(2.0 / (domain.area * g1 * std::abs(p - 2.0)), 1.0 / p) * std::pow(du, 1.0 / p) *
         std::pow(1.0 / t, 1.0 / p);
}

double log_decay_bound(double t, double dv, const ConstantSet& consts) {
  if (!(consts.p > 1.0) || !(consts.p < 2.0))
    throw std::invalid_argument("log_decay_bound: requires p in (1, 2)");
  if (!(t >= 0.0)) throw std::invalid_argument("log_decay_bound: t must be >= 0");
  return 2.0 * dv * std::exp(-consts.c_star.value * t / (1.0 + dv * dv));
}

// ---------------------------------------------------------------------------
// Tail machinery
// ---------------------------------------------------------------------------

Moments estimate_moments(const EnsembleResult& ens, double t, double r, double eps,
                         const ConstantSet& consts) {
  Moments m;
  const double n = static_cast<double>(ens.paths.size());
  for (const PathStats& ps : ens.paths) {
    m.e_du += ps.delta_u;
    m.e_exp_decay += std::exp(-2.0 * t * consts.c_star.value / (1.0 + ps.delta_u));
    m.e_pow += std::pow(1.0 + ps.delta_u, 2.0 * r);
    m.e_exp_eps += std::exp(eps * ps.delta_u);
  }
  m.e_du /= n;
  m.e_exp_decay /= n;
  m.e_pow /= n;
  m.e_exp_eps /= n;
  return m;
}

double tail_bound(TailKind kind, double t, double alpha, double param, const Moments& moments,
                  const ConstantSet& consts) {
  if (!(consts.p > 1.0) || !(consts.p < 2.0))
    throw std::invalid_argument("tail_bound: requires p in (1, 2)");
  if (!(t > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("tail_bound: requires t > 0 and alpha > 0");
  const double la = std::log(alpha + 1.0);
  const double cs = consts.c_star.value;
  switch (kind) {
    case TailKind::Basic:
      return 2.0 / la * std::sqrt(moments.e_du * moments.e_exp_decay);
    case TailKind::Poly: {
      if (!(param >= 1.0)) throw std::invalid_argument("tail_bound: poly requires r >= 1");
      return std::pow(1.0 / t, param) * (2.0 / la) * std::pow(param / (2.0 * cs), param) *
             std::sqrt(moments.e_du * moments.e_pow);
    }
    case TailKind::Exp: {
      if (!(param > 0.0)) throw std::invalid_argument("tail_bound: exp requires eps > 0");
      return std::exp(-std::sqrt(t) * std::sqrt(param * cs / 2.0)) *
             (2.0 * std::exp(0.5 * param) / la) * std::sqrt(moments.e_du * moments.e_exp_eps);
    }
  }
  throw std::invalid_argument("tail_bound: unknown kind");
}

namespace {

double betacf(double a, double b, double x) {
  // Lentz continued fraction for the regularized incomplete beta function.
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log1p(-x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + b * std::log1p(-x) +
                        a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

// 95% Clopper-Pearson upper confidence limit for x successes in n trials.
double clopper_pearson_upper(int x, int n) {
  if (x >= n) return 1.0;
  const double a = x + 1.0, b = static_cast<double>(n - x);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inc_beta(a, b, mid) < 0.975)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

size_t time_index(const EnsembleResult& ens, double t) {
  for (size_t i = 0; i < ens.t_grid.size(); ++i)
    if (std::abs(ens.t_grid[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  throw std::invalid_argument("empirical_tail: time not sampled by the ensemble");
}

}  // namespace

TailEstimate empirical_tail(const EnsembleResult& ens, double t, double alpha) {
  const size_t it = time_index(ens, t);
  int count = 0;
  for (const PathStats& ps : ens.paths)
    if (ps.sq_dev[it] > alpha) ++count;
  const int n = static_cast<int>(ens.paths.size());
  TailEstimate est;
  est.fraction = static_cast<double>(count) / n;
  est.ci_halfwidth = 1.96 * std::sqrt(est.fraction * (1.0 - est.fraction) / n);
  est.clopper_pearson_upper = clopper_pearson_upper(count, n);
  return est;
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

bool BoundReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.pass; });
}

BoundReport verify(const EnsembleResult& ens, const ConstantSet& consts, const FlowParams& params,
                   const GridDomain& domain, double g1, const VerifyOptions& options) {
  if (ens.paths.empty() || ens.t_grid.empty())
    throw std::invalid_argument("verify: ensemble is empty");
  const bool small_p = params.p > 1.0 && params.p < 2.0;
  const bool large_p = params.p > 2.0;
  if (large_p && options.delta && (!consts.c_poincare_l1pd || !consts.c_embed_w11pd_linf))
    throw std::invalid_argument("verify: constants missing for the requested p regime (p > 2)");

  BoundReport report;
  const double mrel = options.margin_rel, mabs = options.margin_abs;

  auto pathwise_row = [&](const std::string& name, double t, std::optional<double> param,
                          const std::function<double(const PathStats&)>& bound_of,
                          const std::function<double(const PathStats&, size_t)>& empirical_of,
                          size_t it) {
    BoundRow row;
    row.name = name;
    row.t = t;
    row.param = param;
    row.margin = std::numeric_limits<double>::infinity();
    for (const PathStats& ps : ens.paths) {
      const double b = bound_of(ps);
      const double e = empirical_of(ps, it);
      const double margin = b * (1.0 + mrel) + mabs - e;
      if (margin < row.margin) {
        row.margin = margin;
        row.bound = b;
        row.empirical = e;
      }
    }
    row.pass = row.margin >= 0.0;
    report.rows.push_back(row);
  };

  for (size_t it = 0; it < ens.t_grid.size(); ++it) {
    const double t = ens.t_grid[it];
    if (!(t > 0.0)) continue;
    pathwise_row(
        "l1-decay", t, std::nullopt,
        [&](const PathStats& ps) { return l1_decay_bound(t, ps.delta_u, params.p, g1, domain, consts); },
        [&](const PathStats& ps, size_t k) { return ps.dev_l1[k]; }, it);
    if (small_p)
      pathwise_row(
          "log-decay", t, std::nullopt,
          [&](const PathStats& ps) { return log_decay_bound(t, std::sqrt(ps.delta_u), consts); },
          [&](const PathStats& ps, size_t k) { return std::log(ps.sq_dev[k] + 1.0); }, it);
    if (large_p && options.delta)
      pathwise_row(
          "linf-decay", t, options.delta,
          [&](const PathStats& ps) {
            return linf_decay_bound(t, ps.delta_u, params.p, *options.delta, g1, domain, consts);
          },
          [&](const PathStats& ps, size_t k) { return ps.dev_linf[k]; }, it);
  }

  auto not_applicable = [&](const std::string& name) {
    BoundRow row;
    row.name = name;
    row.t = ens.t_grid.back();
    row.applicable = false;
    row.pass = true;
    report.rows.push_back(row);
  };
  if (!small_p) {
    not_applicable("log-decay");
    not_applicable("tail-basic");
    not_applicable("tail-poly");
    not_applicable("tail-exp");
  }
  if (!large_p || !options.delta) not_applicable("linf-decay");

  if (small_p) {
    auto tail_row = [&](const std::string& name, TailKind kind, double t, double alpha,
                        std::optional<double> param, const Moments& m) {
      BoundRow row;
      row.name = name;
      row.t = t;
      row.alpha = alpha;
      row.param = param;
      row.bound = tail_bound(kind, t, alpha, param.value_or(0.0), m, consts);
      const TailEstimate est = empirical_tail(ens, t, alpha);
      row.empirical = est.fraction;
      row.ci_halfwidth = est.ci_halfwidth;
      const double allowance = est.clopper_pearson_upper - est.fraction;
      row.margin = row.bound + allowance + mabs - est.fraction;
      row.pass = row.margin >= 0.0;
      report.rows.push_back(row);
    };
    for (double t : ens.t_grid) {
      if (!(t > 0.0)) continue;
      const Moments base = estimate_moments(ens, t, 1.0, 1.0, consts);
      for (double alpha : options.alpha_grid) {
        tail_row("tail-basic", TailKind::Basic, t, alpha, std::nullopt, base);
        for (double r : options.r_list)
          tail_row("tail-poly", TailKind::Poly, t, alpha, r,
                   estimate_moments(ens, t, r, 1.0, consts));
        for (double eps : options.eps_list)
          tail_row("tail-exp", TailKind::Exp, t, alpha, eps,
                   estimate_moments(ens, t, 1.0, eps, consts));
      }
    }
  }
  return report;
}

std::string format_report(const BoundReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %12s %12s %12s %6s\n", "bound", "t", "alpha",
                "param", "bound", "empirical", "margin", "state");
  os << line;
  for (const BoundRow& r : report.rows) {
    auto opt = [](const std::optional<double>& v) {
      char buf[32];
      if (!v) return std::string("-");
      std::snprintf(buf, sizeof buf, "%.3g", *v);
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "%-12s %8.3g %8s %8s %12.5g %12.5g %12.5g %6s\n",
                  r.name.c_str(), r.t, opt(r.alpha).c_str(), opt(r.param).c_str(), r.bound,
                  r.empirical, r.margin, !r.applicable ? "N/A" : (r.pass ? "PASS" : "FAIL"));
    os << line;
  }
  return os.str();
}

}  // namespace plap

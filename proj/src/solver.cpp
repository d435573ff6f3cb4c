#include "fdr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "fdr/csv.hpp"
#include "fdr/numeric.hpp"

namespace fdr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_inputs(const ModelSupport& support, const LossTable& losses, double lambda) {
  if (losses.values.size() != support.size())
    throw std::invalid_argument("solver: loss table not aligned with support");
  if (support.size() == 0) throw std::invalid_argument("solver: empty support");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solver: lambda must be positive and finite");
}

// Normalization residual sum_i q_i * fdot_inv(-(beta+L_i)/lambda) - 1, with the
// zero extension at a finite lower end of J and a +inf guard left of the
// feasible interval. Strictly decreasing where finite.
double residual_ext(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                    double lambda, double beta) {
  double hi = gen.j_upper();
  double s = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    double t = -(beta + losses.values[i]) / lambda;
    if (t >= hi) return kInf;
    s += support.weights[i] * gen.fdot_inv_ext(t);
  }
  return s - 1.0;
}

double f_with_zero_limit(const Generator& gen, double x) {
  return x == 0.0 ? gen.f_at_zero() : gen.f(x);
}

}  // namespace

BetaInterval feasible_beta_interval(const Generator& gen, const ModelSupport& support,
                                    const LossTable& losses, double lambda) {
  check_inputs(support, losses, lambda);
  Extremes ex = essential_extremes(support, losses);
  double lo = std::isfinite(gen.j_upper()) ? -ex.delta_star - lambda * gen.j_upper() : -kInf;
  double hi = std::isfinite(gen.j_lower()) ? -ex.sup_loss - lambda * gen.j_lower() : kInf;
  return {lo, hi};
}

double dual_objective(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                      double lambda, double beta) {
  check_inputs(support, losses, lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    double c = gen.conjugate(-(beta + losses.values[i]) / lambda);
    if (c == kInf) return kInf;
    s += support.weights[i] * c;
  }
  return beta + lambda * s;
}

double dual_objective_derivative(const Generator& gen, const ModelSupport& support,
                                 const LossTable& losses, double lambda, double beta) {
  check_inputs(support, losses, lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    double t = -(beta + losses.values[i]) / lambda;
    if (!(t > gen.j_lower() && t < gen.j_upper()))
      throw std::domain_error("dual derivative: argument at atom '" + support.atom_ids[i] +
                              "' is outside the inverse-derivative domain");
    s += support.weights[i] * gen.fdot_inv(t);
  }
  return 1.0 - s;
}

NormalizationResult normalization_constant(const Generator& gen, const ModelSupport& support,
                                           const LossTable& losses, double lambda, double tol) {
  check_inputs(support, losses, lambda);
  if (!(tol > 0.0)) throw std::invalid_argument("normalization: tol must be positive");
  BetaInterval iv = feasible_beta_interval(gen, support, losses, lambda);
  auto resid = [&](double b) { return residual_ext(gen, support, losses, lambda, b); };

  // Right end of the root bracket; a positive residual there means no root.
  double b_right, f_right;
  if (std::isfinite(iv.hi)) {
    b_right = iv.hi;
    f_right = resid(b_right);
    if (f_right > 0.0) {
      FeasibilityReport fr = feasibility(gen, support, losses, lambda);
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "lambda=%g is below the admissible range (lambda_star=%g)", lambda,
                    fr.lambda_star);
      throw InfeasibleLambdaError(msg, fr.lambda_star, fr.boundary_included);
    }
  } else {
    double b0 = -expectation(support, losses.values);
    if (std::isfinite(iv.lo) && b0 <= iv.lo) b0 = iv.lo + 1e-3 * std::max(1.0, std::fabs(iv.lo));
    double step = std::max(1.0, lambda + std::fabs(b0));
    b_right = b0;
    f_right = resid(b_right);
    int guard = 0;
    while (f_right >= 0.0) {
      if (f_right == 0.0) break;  // landed on the root
      b_right += step;
      step *= 2.0;
      f_right = resid(b_right);
      if (++guard > 200) throw std::runtime_error("normalization: right bracket search failed");
    }
  }

  numeric::RootResult rr;
  if (f_right >= 0.0) {
    // Residual vanishes exactly at the bracket end (admissibility boundary).
    rr.x = b_right;
    rr.residual = f_right;
  } else {
    double b_left, f_left;
    if (std::isfinite(iv.lo)) {
      b_left = iv.lo;
      f_left = kInf;  // open end, residual blows up
    } else {
      double step = std::max(1.0, lambda + std::fabs(b_right));
      b_left = b_right - step;
      f_left = resid(b_left);
      int guard = 0;
      while (f_left <= 0.0) {
        step *= 2.0;
        b_left -= step;
        f_left = resid(b_left);
        if (++guard > 200) throw std::runtime_error("normalization: left bracket search failed");
      }
    }
    rr = numeric::decreasing_root(resid, b_left, b_right, f_left, f_right, std::min(tol, 1e-13));
    if (std::fabs(rr.residual) > tol)
      throw std::runtime_error("normalization: residual " + std::to_string(rr.residual) +
                               " misses tolerance");
  }

  // Independent dual route: golden section on G, then a secant pass on a
  // finite-difference derivative of G. Uses conjugate evaluations only.
  auto G = [&](double b) { return dual_objective(gen, support, losses, lambda, b); };
  double ga = std::isfinite(iv.lo) ? iv.lo : rr.x - std::max(1.0, lambda + std::fabs(rr.x));
  double gb = std::isfinite(iv.hi) ? iv.hi + lambda : rr.x + std::max(1.0, lambda + std::fabs(rr.x));
  double g_mid = G(rr.x);
  for (int guard = 0; !(G(ga) > g_mid); ++guard) {  // walk out until uphill both sides
    ga -= std::max(1.0, std::fabs(ga));
    if (guard > 200) throw std::runtime_error("normalization: dual bracket search failed (left)");
  }
  for (int guard = 0; !(G(gb) > g_mid); ++guard) {
    gb += std::max(1.0, std::fabs(gb));
    if (guard > 200) throw std::runtime_error("normalization: dual bracket search failed (right)");
  }
  double scale = std::max({1.0, std::fabs(ga), std::fabs(gb)});
  numeric::MinResult mr = numeric::golden_min(G, ga, gb, 1.5e-8 * scale);

  double h0 = 3e-3 * lambda;
  if (std::isfinite(iv.lo))  // keep the difference stencil clear of the +inf region
    h0 = std::min(h0, 0.25 * std::max(mr.x - iv.lo, 1e-8 * lambda));
  int dual_evals = mr.evals;
  double x1 = mr.x;
  // Secant root of the difference derivative, then again with the stencil
  // shrunk 4x until the minimizer stops moving: the O(h^4) stencil bias can
  // dominate when a conjugate argument sits near the edge of its domain.
  for (int level = 0; level < 6; ++level) {
    double h = h0 * std::pow(0.25, level);
    // Near a finite right endpoint the conjugate's clamp puts a curvature
    // kink exactly at iv.hi; a centered stencil spanning it is biased, so
    // switch to a one-sided stencil that stays on the smooth side.
    auto D = [&](double b) {
      if (std::isfinite(iv.hi) && b + 2.0 * h > iv.hi)
        return numeric::left_derivative(G, b, h);
      return numeric::richardson_derivative(G, b, h);
    };
    auto clamp_hi = [&](double b) {
      return std::isfinite(iv.hi) ? std::min(b, iv.hi) : b;
    };
    double x0 = x1;
    double prev = x1;
    x1 = clamp_hi(x1 + 0.25 * h);
    if (x1 == x0) x0 = x1 - 0.25 * h;
    double d0 = D(x0), d1 = D(x1);
    dual_evals += 8;
    for (int it = 0; it < 60; ++it) {
      if (!(d1 != d0) || !std::isfinite(d1) || !std::isfinite(d0)) break;
      double x2 = x1 - d1 * (x1 - x0) / (d1 - d0);
      if (!std::isfinite(x2)) break;
      if (std::fabs(x2 - x1) > h) x2 = x1 + (x2 > x1 ? h : -h);  // trust region
      x2 = clamp_hi(x2);
      if (x2 == x1) break;
      x0 = x1;
      d0 = d1;
      x1 = x2;
      d1 = D(x1);
      dual_evals += 4;
      if (std::fabs(x1 - x0) <= 4e-12 * std::max(1.0, std::fabs(x1))) break;
    }
    if (level > 0 && std::fabs(x1 - prev) <= 0.1 * tol * std::max(1.0, std::fabs(x1))) break;
  }

  NormalizationResult out;
  out.beta = rr.x;
  out.beta_root = rr.x;
  out.beta_dual = x1;
  out.dual_value = G(x1);
  out.root_evals = rr.evals;
  out.dual_evals = dual_evals;
  if (std::fabs(out.beta_root - out.beta_dual) > 10.0 * tol)
    throw std::runtime_error("normalization: root and dual routes disagree (" +
                             std::to_string(out.beta_root) + " vs " +
                             std::to_string(out.beta_dual) + ")");
  return out;
}

Posterior solve_posterior(const Generator& gen, const ModelSupport& support,
                          const LossTable& losses, double lambda, double tol) {
  check_inputs(support, losses, lambda);
  Posterior p;
  NormalizationResult nr = normalization_constant(gen, support, losses, lambda, tol);
  p.beta = nr.beta;
  p.normalization = nr.beta;

  if (!is_separable(support, losses)) {
    // Constant loss: the regularized problem's unique solution is Q itself.
    p.weights = support.weights;
    p.rnd.assign(support.size(), 1.0);
    p.risk = expectation(support, losses.values);
    p.divergence = 0.0;
    p.eta = 0.0;
    p.separable = false;
    return p;
  }

  std::vector<double> rnd(support.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    rnd[i] = gen.fdot_inv_ext(-(nr.beta + losses.values[i]) / lambda);
    sum += support.weights[i] * rnd[i];
  }
  // sum = 1 + residual; divide it out so the masses are exactly normalized
  p.weights.resize(support.size());
  p.rnd.resize(support.size());
  double risk = 0.0, div = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    p.rnd[i] = rnd[i] / sum;
    p.weights[i] = support.weights[i] * p.rnd[i];
    risk += p.weights[i] * losses.values[i];
    div += support.weights[i] * f_with_zero_limit(gen, p.rnd[i]);
  }
  p.risk = risk;
  p.divergence = div;
  p.eta = div;
  p.separable = true;
  return p;
}

double primal_objective(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                        double lambda, const std::vector<double>& weights) {
  check_inputs(support, losses, lambda);
  if (weights.size() != support.size())
    throw std::invalid_argument("primal_objective: weight vector not aligned with support");
  double risk = 0.0, div = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    risk += weights[i] * losses.values[i];
    div += support.weights[i] * f_with_zero_limit(gen, weights[i] / support.weights[i]);
  }
  return risk + lambda * div;
}

GapReport duality_gap(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                      double lambda, const Posterior& posterior) {
  GapReport g;
  g.primal = posterior.risk + lambda * posterior.divergence;
  g.dual = -dual_objective(gen, support, losses, lambda, posterior.beta);
  g.gap = std::fabs(g.primal - g.dual);
  return g;
}

bool is_admissible(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                   double lambda) {
  check_inputs(support, losses, lambda);
  if (!gen.zero_limit().finite) return true;  // residual sweeps all of (0, inf)
  BetaInterval iv = feasible_beta_interval(gen, support, losses, lambda);
  return residual_ext(gen, support, losses, lambda, iv.hi) <= 0.0;
}

FeasibilityReport feasibility(const Generator& gen, const ModelSupport& support,
                              const LossTable& losses, double lambda, double rel_tol) {
  check_inputs(support, losses, lambda);
  FeasibilityReport rep;
  rep.beta_interval = feasible_beta_interval(gen, support, losses, lambda);
  rep.admissible = is_admissible(gen, support, losses, lambda);
  if (!gen.zero_limit().finite || !is_separable(support, losses)) {
    rep.lambda_star = 0.0;
    rep.boundary_included = false;  // lambda must stay positive
    return rep;
  }

  Extremes ex = essential_extremes(support, losses);
  double hi = std::max(1.0, 2.0 * (ex.sup_loss - ex.delta_star));
  int guard = 0;
  while (!is_admissible(gen, support, losses, hi)) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("feasibility: no admissible lambda found");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > rel_tol * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (is_admissible(gen, support, losses, mid) ? hi : lo) = mid;
  }
  rep.lambda_star = hi;  // smallest certified admissible point

  BetaInterval ivs = feasible_beta_interval(gen, support, losses, rep.lambda_star);
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    sum += support.weights[i] *
           gen.fdot_inv_ext(-(ivs.hi + losses.values[i]) / rep.lambda_star);
  rep.boundary_included = std::isfinite(sum) && std::fabs(sum - 1.0) <= 1e-6;
  return rep;
}

std::vector<double> tilted_measure(const Generator& gen, const Posterior& posterior,
                                   const ModelSupport& support) {
  if (posterior.rnd.size() != support.size())
    throw std::invalid_argument("tilted_measure: posterior not aligned with support");
  std::vector<double> w(support.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!(posterior.rnd[i] > 0.0))
      throw std::domain_error("tilted measure undefined at the admissibility boundary");
    w[i] = support.weights[i] / gen.fddot(posterior.rnd[i]);
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

double normalization_derivative(const Generator& gen, const ModelSupport& support,
                                const LossTable& losses, double lambda,
                                const Posterior& posterior) {
  check_inputs(support, losses, lambda);
  std::vector<double> tw = tilted_measure(gen, posterior, support);
  double tilted_risk = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) tilted_risk += tw[i] * losses.values[i];
  return (posterior.normalization + tilted_risk) / lambda;
}

std::vector<SweepRow> sweep(const Generator& gen, const ModelSupport& support,
                            const LossTable& losses, const std::vector<double>& lambdas,
                            double tol) {
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (lambdas[i] < lambdas[i - 1]) throw std::invalid_argument("sweep: grid must be ascending");
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  for (double lam : lambdas) {
    SweepRow r;
    r.lambda = lam;
    try {
      Posterior p = solve_posterior(gen, support, losses, lam, tol);
      GapReport g = duality_gap(gen, support, losses, lam, p);
      r.admissible = true;
      r.normalization = p.normalization;
      r.risk = p.risk;
      r.divergence = p.divergence;
      r.eta = p.eta;
      r.primal = g.primal;
      r.dual = g.dual;
      r.gap = g.gap;
      try {
        r.dn_dlambda = normalization_derivative(gen, support, losses, lam, p);
      } catch (const std::domain_error&) {
        r.dn_dlambda = kNan;  // boundary point, sensitivity undefined
      }
    } catch (const InfeasibleLambdaError&) {
      r.admissible = false;
      r.normalization = r.risk = r.divergence = r.eta = kNan;
      r.primal = r.dual = r.gap = r.dn_dlambda = kNan;
    }
    rows.push_back(r);
  }
  return rows;
}

bool sweep_monotone(const std::vector<SweepRow>& rows, double slack) {
  bool have_prev = false;
  double prev = 0.0;
  for (const auto& r : rows) {
    if (!r.admissible) continue;
    if (have_prev && r.normalization < prev - slack) return false;
    prev = r.normalization;
    have_prev = true;
  }
  return true;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "lambda,admissible,N,risk,divergence,eta,primal,dual,gap,dN_dlambda\n";
  for (const auto& r : rows) {
    out << csv::fmt17(r.lambda) << ',' << (r.admissible ? 1 : 0) << ','
        << csv::fmt17(r.normalization) << ',' << csv::fmt17(r.risk) << ','
        << csv::fmt17(r.divergence) << ',' << csv::fmt17(r.eta) << ',' << csv::fmt17(r.primal)
        << ',' << csv::fmt17(r.dual) << ',' << csv::fmt17(r.gap) << ','
        << csv::fmt17(r.dn_dlambda) << '\n';
  }
  out << "# N_monotone=" << (sweep_monotone(rows) ? "true" : "false") << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_sweep_csv(out, rows);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<double> log_spaced(double start, double stop, std::size_t count) {
  if (count == 0) throw std::invalid_argument("log_spaced: count must be positive");
  if (!(start > 0.0) || !(stop > 0.0) || start > stop)
    throw std::invalid_argument("log_spaced: endpoints must be positive and ordered");
  std::vector<double> v;
  v.reserve(count);
  if (count == 1) {
    v.push_back(start);
    return v;
  }
  double la = std::log(start), lb = std::log(stop);
  for (std::size_t i = 0; i < count; ++i)
    v.push_back(std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1)));
  v.front() = start;
  v.back() = stop;
  return v;
}

}  // namespace fdr

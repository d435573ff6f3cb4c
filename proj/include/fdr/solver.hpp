#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/model_space.hpp"

namespace fdr {

// Open interval of multipliers beta for which every argument -(beta + L_i)/lambda
// lands inside the generator's derivative image J. Either end may be infinite.
struct BetaInterval {
  double lo;
  double hi;
};

BetaInterval feasible_beta_interval(const Generator& gen, const ModelSupport& support,
                                    const LossTable& losses, double lambda);

// Thrown when lambda falls outside the admissible range. Carries the threshold
// so callers can report it.
class InfeasibleLambdaError : public std::runtime_error {
 public:
  InfeasibleLambdaError(const std::string& what, double lambda_star, bool boundary_included)
      : std::runtime_error(what), lambda_star_(lambda_star), boundary_included_(boundary_included) {}
  double lambda_star() const { return lambda_star_; }
  bool boundary_included() const { return boundary_included_; }

 private:
  double lambda_star_;
  bool boundary_included_;
};

// G(beta) = beta + lambda * E_Q[f*(-(beta + L)/lambda)], the strictly convex
// objective whose minimizer is the normalization multiplier. Uses the clamped
// conjugate so it is defined (possibly +inf) for every real beta.
double dual_objective(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                      double lambda, double beta);

// G'(beta) = 1 - E_Q[fdot_inv(-(beta + L)/lambda)], strictly increasing on the
// feasible interval. Throws std::domain_error (naming the offending atom) if
// some argument leaves J.
double dual_objective_derivative(const Generator& gen, const ModelSupport& support,
                                 const LossTable& losses, double lambda, double beta);

struct NormalizationResult {
  double beta;        // agreed value N(lambda) (root-finder branch)
  double beta_root;   // from monotone root finding on the residual
  double beta_dual;   // from minimizing G
  double dual_value;  // G at the dual minimizer
  int root_evals;
  int dual_evals;
};

// The normalization value N(lambda) is the beta solving
// E_Q[fdot_inv(-(beta + L)/lambda)] = 1. Computed twice, by bracketed root
// finding on the residual and by minimizing G with conjugate evaluations only;
// the two must agree within 10*tol. Throws InfeasibleLambdaError when the
// residual has no root in the feasible interval.
NormalizationResult normalization_constant(const Generator& gen, const ModelSupport& support,
                                           const LossTable& losses, double lambda,
                                           double tol = 1e-10);

struct Posterior {
  std::vector<double> weights;  // probability masses, aligned with support
  std::vector<double> rnd;      // dP/dQ per atom
  double beta;                  // N(lambda)
  double normalization;         // same value, under its role as N(lambda)
  double risk;                  // E_P[L]
  double divergence;            // D_f(P || Q)
  double eta;                   // constraint level of the equivalent problem (= divergence)
  bool separable;               // false when all losses coincide (posterior == Q exactly)
};

// Solves the regularized problem exactly on the finite support.
Posterior solve_posterior(const Generator& gen, const ModelSupport& support,
                          const LossTable& losses, double lambda, double tol = 1e-10);

// Primal objective E_P[L] + lambda * D_f(P||Q) at an arbitrary measure given by
// its atom masses.
double primal_objective(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                        double lambda, const std::vector<double>& weights);

struct GapReport {
  double primal;  // risk + lambda * divergence at the posterior
  double dual;    // -G(N(lambda))
  double gap;     // |primal - dual|
};

GapReport duality_gap(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                      double lambda, const Posterior& posterior);

// Whether the normalization equation has a solution at this lambda, decided
// from the residual limit at the feasible interval's right end.
bool is_admissible(const Generator& gen, const ModelSupport& support, const LossTable& losses,
                   double lambda);

struct FeasibilityReport {
  double lambda_star;      // infimum of the admissible set (0 when everything works)
  bool boundary_included;  // whether lambda_star itself is admissible
  bool admissible;         // verdict for the queried lambda
  BetaInterval beta_interval;  // feasible multipliers at the queried lambda
};

// Locates the admissibility threshold. Generators whose f'(0+) limit is -inf
// admit every positive lambda (lambda_star = 0, excluded); finite-limit
// generators get a bisection on lambda to relative width rel_tol, and boundary
// membership is decided by evaluating the normalization sum at the endpoint.
FeasibilityReport feasibility(const Generator& gen, const ModelSupport& support,
                              const LossTable& losses, double lambda, double rel_tol = 1e-8);

// Measure with masses proportional to q_i / fddot(rnd_i); drives the
// sensitivity identity below. Requires an interior posterior (all rnd > 0).
std::vector<double> tilted_measure(const Generator& gen, const Posterior& posterior,
                                   const ModelSupport& support);

// dN/dlambda = (N(lambda) + risk under the tilted measure) / lambda.
double normalization_derivative(const Generator& gen, const ModelSupport& support,
                                const LossTable& losses, double lambda,
                                const Posterior& posterior);

struct SweepRow {
  double lambda;
  bool admissible;
  double normalization;  // nan when inadmissible, same for the fields below
  double risk;
  double divergence;
  double eta;
  double primal;
  double dual;
  double gap;
  double dn_dlambda;
};

// Grid must be ascending; inadmissible points are recorded, not fatal.
std::vector<SweepRow> sweep(const Generator& gen, const ModelSupport& support,
                            const LossTable& losses, const std::vector<double>& lambdas,
                            double tol = 1e-10);

// Non-strict monotonicity of N over the admissible rows, with slack for
// roundoff. Note this is a report, not an invariant: N is constant for
// chi_squared and genuinely decreasing for kl.
bool sweep_monotone(const std::vector<SweepRow>& rows, double slack = 1e-9);

// Writes the sweep table and appends a trailing `# N_monotone=...` comment.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// count log-spaced points from start to stop inclusive; endpoints positive.
std::vector<double> log_spaced(double start, double stop, std::size_t count);

}  // namespace fdr

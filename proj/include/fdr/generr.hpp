#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/learning.hpp"
#include "fdr/model_space.hpp"
#include "fdr/solver.hpp"

namespace fdr {

// Expected loss difference R_z(P1) - R_z(P2) under one loss table.
double gap(const std::vector<double>& p1, const std::vector<double>& p2,
           const LossTable& losses);

// Mixture of the algorithm's conditionals under the dataset law.
struct MarginalLaw {
  std::vector<double> weights;
  bool strictly_positive = false;  // every atom keeps positive marginal mass
};

MarginalLaw marginal_model_law(const StochasticAlgorithm& alg,
                               const FiniteWorld& world,
                               const ModelSupport& support);

// Exact generalization error of an arbitrary algorithm:
// E over independent (z, u) of R_u(P_z) - R_z(P_z). Computed by a paired
// double sum so degenerate cases (single dataset, data-independent
// algorithm) come out exactly zero. Cross-checked internally against the
// marginal decomposition sum_z P(z) [R_z(Pbar) - R_z(P_z)].
double generalization_error_direct(const StochasticAlgorithm& alg,
                                   const FiniteWorld& world,
                                   const ModelSupport& support);

// R_z(P) - R_z(P*) written through the generator pair (f, f*) evaluated on
// the solved posterior. Equals gap(p, posterior weights) identically; the
// point of the rewrite is that it needs no second risk evaluation.
double gap_via_conjugate(const std::vector<double>& p, const Posterior& post,
                         const Generator& gen, const ModelSupport& support,
                         const LossTable& losses, double lambda);

// Generalization error of an arbitrary algorithm through the conjugate-pair
// identity: per dataset, weight each atom's f(rnd) + f*(t) bracket by the
// conditional-minus-marginal mass difference over the posterior mass, then
// average with weight lambda. Agrees with the direct route for any algorithm
// at any admissible lambda.
double generalization_error_theorem5(const StochasticAlgorithm& alg,
                                     const FiniteWorld& world,
                                     const Generator& gen, double lambda,
                                     const ModelSupport& support);

// Generalization error of the regularized algorithm itself:
// lambda * sum_z P(z) * (E_{P*_z}[fdot(rnd_z)] - E_{Pbar}[fdot(rnd_z)]).
double generalization_error_fdr(const Generator& gen, const FiniteWorld& world,
                                const ModelSupport& support, double lambda);

// Log-ratio form of the same quantity, valid for the kl generator only
// (fdot(x) = log x + 1 and the constants cancel across the two measures).
double gibbs_generalization_error(const FiniteWorld& world,
                                  const ModelSupport& support, double lambda);

// The regularized posterior of each dataset, packaged as an algorithm.
StochasticAlgorithm fdr_algorithm(const Generator& gen,
                                  const FiniteWorld& world,
                                  const ModelSupport& support, double lambda,
                                  double tol = 1e-10);

struct PerDatasetRow {
  std::string id;
  double normalization = 0.0;
  double risk_train = 0.0;     // risk of the conditional on its own dataset
  double risk_marginal = 0.0;  // risk of the algorithm's marginal on it
  double gap = 0.0;            // risk_marginal - risk_train
};

struct GenErrReport {
  double direct = 0.0;
  std::optional<double> theorem5;  // conjugate-pair route (any algorithm)
  std::optional<double> theorem6;  // fdot route (regularized algorithm only)
  std::optional<double> gibbs;     // log form (kl only)
  std::vector<PerDatasetRow> table;
  bool routes_agree = false;
  double max_spread = 0.0;  // largest |route - direct| over populated routes
};

// Runs every route that applies. alg_is_fdr declares that alg was produced by
// fdr_algorithm(gen, world, support, lambda), enabling the routes whose
// derivation assumes the regularized conditionals.
GenErrReport gen_err_report(const StochasticAlgorithm& alg,
                            const FiniteWorld& world,
                            const ModelSupport& support, const Generator& gen,
                            double lambda, bool alg_is_fdr,
                            double tol = 1e-10);

// Two stacked CSV sections: route,value rows (absent routes are nan), then a
// per-dataset table.
void write_generr_csv(std::ostream& out, const GenErrReport& report);
void write_generr_csv(const std::string& path, const GenErrReport& report);

}  // namespace fdr

#pragma once

#include <string>
#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/model_space.hpp"

namespace fdr {

// E_Q[f(p/q)] for an arbitrary mass vector on the support atoms.
double divergence_value(const Generator& gen, const ModelSupport& support,
                        const std::vector<double>& weights);

struct OracleTrace {
  std::vector<int> iteration;
  std::vector<double> objective;
  std::vector<double> tv_to_reference;  // nan entries when no reference was given
};

void write_trace_csv(const std::string& path, const OracleTrace& trace);

// Minimizes E_P[L] + lambda * D_f(P||Q) over the simplex by multiplicative
// weights with monotone backtracking, never consulting the closed-form
// solution. Interior floor 1e-12. Throws if the first-order residual is still
// above 1e-6 when the iteration budget runs out. `reference`, when given, only
// feeds the trace's TV column.
std::vector<double> brute_force_regularized(const Generator& gen, const ModelSupport& support,
                                            const LossTable& losses, double lambda,
                                            int iterations = 100000, double step = 0.5,
                                            const std::vector<double>* reference = nullptr,
                                            OracleTrace* trace = nullptr);

struct ConstrainedResult {
  std::vector<double> weights;
  double risk;
  double divergence;
  bool active;  // divergence within 1e-4 of eta
};

// Minimizes E_P[L] over {P : D_f(P||Q) <= eta} by barycentric grid search
// plus a bisected multiplier sweep of the mirror-descent minimizer, keeping
// the best feasible point seen. resolution 0 picks a default from the atom
// count.
ConstrainedResult brute_force_constrained(const Generator& gen, const ModelSupport& support,
                                          const LossTable& losses, double eta,
                                          int resolution = 0);

}  // namespace fdr

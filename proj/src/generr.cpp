#include "fdr/generr.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fdr/csv.hpp"

namespace fdr {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double risk_on(const std::vector<double>& p, const LossTable& losses) {
  assert(p.size() == losses.values.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * losses.values[i];
  return s;
}

void check_alignment(const StochasticAlgorithm& alg, const FiniteWorld& world,
                     const ModelSupport& support) {
  if (alg.conditionals.size() != world.size())
    throw std::invalid_argument("algorithm covers " + std::to_string(alg.conditionals.size()) +
                                " datasets, world has " + std::to_string(world.size()));
  for (const auto& c : alg.conditionals)
    if (c.size() != support.size())
      throw std::invalid_argument("algorithm conditional length does not match the support");
}

}  // namespace

double gap(const std::vector<double>& p1, const std::vector<double>& p2,
           const LossTable& losses) {
  if (p1.size() != losses.values.size() || p2.size() != losses.values.size())
    throw std::invalid_argument("gap: measure length does not match the loss table");
  double s = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) s += (p1[i] - p2[i]) * losses.values[i];
  return s;
}

MarginalLaw marginal_model_law(const StochasticAlgorithm& alg, const FiniteWorld& world,
                               const ModelSupport& support) {
  check_alignment(alg, world, support);
  MarginalLaw out;
  out.weights.assign(support.size(), 0.0);
  for (std::size_t z = 0; z < world.size(); ++z)
    for (std::size_t i = 0; i < support.size(); ++i)
      out.weights[i] += world.probabilities[z] * alg.conditionals[z][i];
  out.strictly_positive = true;
  for (double w : out.weights)
    if (!(w > 0.0)) out.strictly_positive = false;
  return out;
}

double generalization_error_direct(const StochasticAlgorithm& alg, const FiniteWorld& world,
                                   const ModelSupport& support) {
  check_alignment(alg, world, support);
  const std::size_t m = world.size();
  // Pair (z, u) with (u, z) so a data-independent algorithm and the single
  // dataset case cancel to an exact zero instead of accumulated roundoff.
  double direct = 0.0;
  for (std::size_t z = 0; z < m; ++z) {
    double rzz = risk_on(alg.conditionals[z], world.losses[z]);
    for (std::size_t u = z + 1; u < m; ++u) {
      double ruu = risk_on(alg.conditionals[u], world.losses[u]);
      double cross = (risk_on(alg.conditionals[z], world.losses[u]) - rzz) +
                     (risk_on(alg.conditionals[u], world.losses[z]) - ruu);
      direct += world.probabilities[z] * world.probabilities[u] * cross;
    }
  }
  MarginalLaw marg = marginal_model_law(alg, world, support);
  double decomposition = 0.0;
  for (std::size_t z = 0; z < m; ++z)
    decomposition += world.probabilities[z] *
                     (risk_on(marg.weights, world.losses[z]) -
                      risk_on(alg.conditionals[z], world.losses[z]));
  if (std::abs(direct - decomposition) > 1e-12)
    throw std::logic_error("generalization error double sum and marginal decomposition disagree");
  return direct;
}

double gap_via_conjugate(const std::vector<double>& p, const Posterior& post,
                         const Generator& gen, const ModelSupport& support,
                         const LossTable& losses, double lambda) {
  if (p.size() != support.size())
    throw std::invalid_argument("gap_via_conjugate: measure length does not match the support");
  double s = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    double t = -(losses.values[i] + post.normalization) / lambda;
    if (post.weights[i] > 0.0) {
      double bracket = gen.f(post.rnd[i]) + gen.conjugate(t);
      s += support.weights[i] * (1.0 - p[i] / post.weights[i]) * bracket;
    } else {
      // clamped atom: the bracket over the vanishing mass tends to t itself
      s += -p[i] * t;
    }
  }
  return lambda * s;
}

double generalization_error_theorem5(const StochasticAlgorithm& alg, const FiniteWorld& world,
                                     const Generator& gen, double lambda,
                                     const ModelSupport& support) {
  check_alignment(alg, world, support);
  MarginalLaw marg = marginal_model_law(alg, world, support);
  double total = 0.0;
  for (std::size_t z = 0; z < world.size(); ++z) {
    Posterior post = solve_posterior(gen, support, world.losses[z], lambda);
    double s = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      double t = -(world.losses[z].values[i] + post.normalization) / lambda;
      double diff = alg.conditionals[z][i] - marg.weights[i];
      if (post.weights[i] > 0.0) {
        double bracket = gen.f(post.rnd[i]) + gen.conjugate(t);
        s += support.weights[i] * bracket * diff / post.weights[i];
      } else {
        s += t * diff;  // continuous extension at a clamped atom
      }
    }
    total += world.probabilities[z] * s;
  }
  return lambda * total;
}

double generalization_error_fdr(const Generator& gen, const FiniteWorld& world,
                                const ModelSupport& support, double lambda) {
  std::vector<Posterior> posts;
  posts.reserve(world.size());
  std::vector<double> pbar(support.size(), 0.0);
  for (std::size_t z = 0; z < world.size(); ++z) {
    posts.push_back(solve_posterior(gen, support, world.losses[z], lambda));
    for (std::size_t i = 0; i < support.size(); ++i)
      pbar[i] += world.probabilities[z] * posts.back().weights[i];
  }
  double total = 0.0;
  for (std::size_t z = 0; z < world.size(); ++z) {
    double s = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      double diff = posts[z].weights[i] - pbar[i];
      if (diff != 0.0) s += diff * gen.fdot(posts[z].rnd[i]);
    }
    total += world.probabilities[z] * s;
  }
  return lambda * total;
}

double gibbs_generalization_error(const FiniteWorld& world, const ModelSupport& support,
                                  double lambda) {
  Generator kl = make_generator("kl");
  std::vector<Posterior> posts;
  posts.reserve(world.size());
  std::vector<double> pbar(support.size(), 0.0);
  for (std::size_t z = 0; z < world.size(); ++z) {
    posts.push_back(solve_posterior(kl, support, world.losses[z], lambda));
    for (std::size_t i = 0; i < support.size(); ++i)
      pbar[i] += world.probabilities[z] * posts.back().weights[i];
  }
  double total = 0.0;
  for (std::size_t z = 0; z < world.size(); ++z) {
    double s = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      double diff = posts[z].weights[i] - pbar[i];
      if (diff != 0.0) s += diff * std::log(posts[z].rnd[i]);
    }
    total += world.probabilities[z] * s;
  }
  return lambda * total;
}

StochasticAlgorithm fdr_algorithm(const Generator& gen, const FiniteWorld& world,
                                  const ModelSupport& support, double lambda, double tol) {
  std::vector<std::vector<double>> conds;
  conds.reserve(world.size());
  for (std::size_t z = 0; z < world.size(); ++z)
    conds.push_back(solve_posterior(gen, support, world.losses[z], lambda, tol).weights);
  return make_algorithm(world.dataset_ids, std::move(conds), support);
}

GenErrReport gen_err_report(const StochasticAlgorithm& alg, const FiniteWorld& world,
                            const ModelSupport& support, const Generator& gen, double lambda,
                            bool alg_is_fdr, double tol) {
  check_alignment(alg, world, support);
  GenErrReport rep;
  rep.direct = generalization_error_direct(alg, world, support);
  try {
    rep.theorem5 = generalization_error_theorem5(alg, world, gen, lambda, support);
  } catch (const InfeasibleLambdaError&) {
  }
  if (alg_is_fdr) {
    try {
      rep.theorem6 = generalization_error_fdr(gen, world, support, lambda);
      if (gen.family() == Family::kl)
        rep.gibbs = gibbs_generalization_error(world, support, lambda);
    } catch (const InfeasibleLambdaError&) {
    }
  }

  MarginalLaw marg = marginal_model_law(alg, world, support);
  for (std::size_t z = 0; z < world.size(); ++z) {
    PerDatasetRow row;
    row.id = world.dataset_ids[z];
    try {
      row.normalization = solve_posterior(gen, support, world.losses[z], lambda, tol).normalization;
    } catch (const InfeasibleLambdaError&) {
      row.normalization = kNan;
    }
    row.risk_train = risk_on(alg.conditionals[z], world.losses[z]);
    row.risk_marginal = risk_on(marg.weights, world.losses[z]);
    row.gap = row.risk_marginal - row.risk_train;
    rep.table.push_back(std::move(row));
  }

  rep.routes_agree = true;
  rep.max_spread = 0.0;
  for (const auto& route : {rep.theorem5, rep.theorem6, rep.gibbs}) {
    if (!route) continue;
    double spread = std::abs(*route - rep.direct);
    rep.max_spread = std::max(rep.max_spread, spread);
    if (!(spread <= 1e-9)) rep.routes_agree = false;
  }
  return rep;
}

void write_generr_csv(std::ostream& out, const GenErrReport& report) {
  auto val = [](const std::optional<double>& v) { return csv::fmt17(v ? *v : kNan); };
  out << "route,value\n";
  out << "direct," << csv::fmt17(report.direct) << "\n";
  out << "theorem5," << val(report.theorem5) << "\n";
  out << "theorem6," << val(report.theorem6) << "\n";
  out << "gibbs," << val(report.gibbs) << "\n";
  out << "\n";
  out << "dataset_id,N,risk_train,risk_marginal,gap\n";
  for (const auto& row : report.table) {
    out << row.id << "," << csv::fmt17(row.normalization) << "," << csv::fmt17(row.risk_train)
        << "," << csv::fmt17(row.risk_marginal) << "," << csv::fmt17(row.gap) << "\n";
  }
}

void write_generr_csv(const std::string& path, const GenErrReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_generr_csv(out, report);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace fdr

#pragma once

#include <string>
#include <vector>

namespace fdr {

enum class SupportKind { finite, quadrature };

// Reference measure Q over models as weighted atoms. Weights are strictly
// positive and sum to 1; atoms below the pruning threshold are dropped at
// construction and the rest renormalized.
struct ModelSupport {
  std::vector<std::string> atom_ids;
  std::vector<double> weights;
  std::vector<std::vector<double>> coords;  // per-atom coordinates; empty if ids only
  SupportKind kind = SupportKind::finite;
  std::string rule;  // quadrature rule name when kind == quadrature
  std::size_t size() const { return weights.size(); }
};

// Input weights must be nonnegative, finite, and sum to 1 within 1e-12.
ModelSupport make_support(std::vector<std::string> ids, std::vector<double> weights,
                          std::vector<std::vector<double>> coords = {});

// Gaussian reference reduced to Gauss-Hermite nodes (coordinates are the
// model parameter values, weights the normalized quadrature masses).
ModelSupport make_gauss_hermite_support(double mean, double sigma, int nodes = 64);

// Uniform reference on [lo, hi] reduced to Gauss-Legendre nodes.
ModelSupport make_gauss_legendre_support(double lo, double hi, int nodes = 64);

// Per-atom empirical losses for one dataset; values nonnegative and finite.
struct LossTable {
  std::string dataset_id;
  std::vector<double> values;
};

LossTable make_loss_table(std::string dataset_id, std::vector<double> values);

// sum_i w_i * values_i
double expectation(const ModelSupport& support, const std::vector<double>& values);

struct Extremes {
  double delta_star = 0.0;  // smallest loss carried by positive mass
  double sup_loss = 0.0;    // largest such loss
};
Extremes essential_extremes(const ModelSupport& support, const LossTable& loss);

// Q-mass of {theta : L(theta) <= delta}; delta must be >= 0.
double rashomon_mass(const ModelSupport& support, const LossTable& loss, double delta);

// True iff the loss takes at least two distinct values on positive-mass atoms.
bool is_separable(const ModelSupport& support, const LossTable& loss);

struct SupportWithLoss {
  ModelSupport support;
  LossTable loss;
};

// CSV with exact header atom_id,weight,loss.
SupportWithLoss load_support_csv(const std::string& path);
void write_support_csv(const std::string& path, const ModelSupport& support, const LossTable& loss);

}  // namespace fdr

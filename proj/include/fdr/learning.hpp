#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fdr/model_space.hpp"

namespace fdr {

struct LabeledDataset {
  std::string id;
  std::vector<std::pair<std::vector<double>, double>> pairs;  // (pattern, label)
  std::size_t n() const { return pairs.size(); }
};

enum class LossKind { zero_one, squared, absolute };

// h(theta, pattern)
using Predictor = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

struct LossSpec {
  LossKind kind = LossKind::zero_one;
  Predictor predictor;
};

double pair_loss(LossKind kind, double predicted, double truth);

Predictor threshold_predictor();  // theta = (c): predicts 1 when pattern[0] >= c, else 0
Predictor linear_predictor();     // dot(theta, pattern)
Predictor value_predictor();      // theta = (v): predicts v regardless of the pattern

// (1/n) * sum_i loss(h(theta, x_i), y_i); throws on a non-finite prediction.
double empirical_risk(const std::vector<double>& theta, const LabeledDataset& dataset,
                      const LossSpec& spec);

// empirical_risk evaluated at every support atom (atom coordinates required).
LossTable loss_table(const ModelSupport& support, const LabeledDataset& dataset,
                     const LossSpec& spec);

struct DataGeneratingLaw {
  std::vector<LabeledDataset> datasets;
  std::vector<double> probabilities;
};

// Probabilities nonnegative, summing to 1 within 1e-12; equal n across datasets.
DataGeneratingLaw make_law(std::vector<LabeledDataset> datasets, std::vector<double> probabilities);

std::vector<std::pair<LabeledDataset, double>> enumerate_law(const DataGeneratingLaw& law);

// All |items|^n datasets of n i.i.d. draws from the given items; hard cap of
// 1e6 enumerated datasets.
DataGeneratingLaw iid_product_law(const std::vector<std::pair<std::vector<double>, double>>& items,
                                  const std::vector<double>& item_probs, std::size_t n);

// A finite learning world: dataset ids, their probabilities, and per-dataset
// loss tables on one shared support.
struct FiniteWorld {
  std::vector<std::string> dataset_ids;
  std::vector<double> probabilities;
  std::vector<LossTable> losses;
  std::size_t size() const { return dataset_ids.size(); }
};

FiniteWorld make_world(const DataGeneratingLaw& law, const ModelSupport& support,
                       const LossSpec& spec);

// CSV with required leading columns dataset_id,prob; any further columns must
// be named by the support's atom ids (in order) and give per-atom losses.
FiniteWorld load_world_csv(const std::string& path, const ModelSupport& support);

// Extensional stochastic algorithm: one distribution over atoms per dataset.
struct StochasticAlgorithm {
  std::vector<std::string> dataset_ids;
  std::vector<std::vector<double>> conditionals;
};

StochasticAlgorithm make_algorithm(std::vector<std::string> dataset_ids,
                                   std::vector<std::vector<double>> conditionals,
                                   const ModelSupport& support);

// CSV with header dataset_id,atom_id,mass; unlisted pairs carry mass 0.
StochasticAlgorithm load_algorithm_csv(const std::string& path, const ModelSupport& support,
                                       const std::vector<std::string>& dataset_ids);

}  // namespace fdr

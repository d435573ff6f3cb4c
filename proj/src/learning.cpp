#include "fdr/learning.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "fdr/csv.hpp"

namespace fdr {

double pair_loss(LossKind kind, double predicted, double truth) {
  switch (kind) {
    case LossKind::zero_one:
      return predicted == truth ? 0.0 : 1.0;
    case LossKind::squared: {
      double d = predicted - truth;
      return d * d;
    }
    case LossKind::absolute:
      return std::fabs(predicted - truth);
  }
  return 0.0;
}

Predictor threshold_predictor() {
  return [](const std::vector<double>& theta, const std::vector<double>& x) {
    if (theta.empty() || x.empty()) throw std::invalid_argument("threshold predictor: empty input");
    return x[0] >= theta[0] ? 1.0 : 0.0;
  };
}

Predictor linear_predictor() {
  return [](const std::vector<double>& theta, const std::vector<double>& x) {
    if (theta.size() != x.size()) throw std::invalid_argument("linear predictor: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += theta[i] * x[i];
    return s;
  };
}

Predictor value_predictor() {
  return [](const std::vector<double>& theta, const std::vector<double>&) {
    if (theta.empty()) throw std::invalid_argument("value predictor: empty model");
    return theta[0];
  };
}

double empirical_risk(const std::vector<double>& theta, const LabeledDataset& dataset,
                      const LossSpec& spec) {
  if (dataset.pairs.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  if (!spec.predictor) throw std::invalid_argument("empirical_risk: missing predictor");
  double s = 0.0;
  for (const auto& [x, y] : dataset.pairs) {
    double pred = spec.predictor(theta, x);
    if (!std::isfinite(pred)) throw std::domain_error("empirical_risk: non-finite prediction");
    s += pair_loss(spec.kind, pred, y);
  }
  return s / static_cast<double>(dataset.n());
}

LossTable loss_table(const ModelSupport& support, const LabeledDataset& dataset,
                     const LossSpec& spec) {
  if (support.coords.size() != support.size())
    throw std::invalid_argument("loss_table: support lacks atom coordinates");
  std::vector<double> values;
  values.reserve(support.size());
  for (const auto& theta : support.coords) values.push_back(empirical_risk(theta, dataset, spec));
  return make_loss_table(dataset.id, std::move(values));
}

DataGeneratingLaw make_law(std::vector<LabeledDataset> datasets, std::vector<double> probabilities) {
  if (datasets.size() != probabilities.size())
    throw std::invalid_argument("law: datasets/probabilities length mismatch");
  if (datasets.empty()) throw std::invalid_argument("law: needs at least one dataset");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("law: probabilities must be nonnegative");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("law: probabilities must sum to 1");
  std::size_t n = datasets[0].n();
  for (const auto& d : datasets) {
    if (d.n() != n) throw std::invalid_argument("law: datasets must share a common size");
    for (const auto& [x, y] : d.pairs) {
      if (!std::isfinite(y)) throw std::invalid_argument("law: non-finite label");
      for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("law: non-finite pattern");
    }
  }
  return {std::move(datasets), std::move(probabilities)};
}

std::vector<std::pair<LabeledDataset, double>> enumerate_law(const DataGeneratingLaw& law) {
  std::vector<std::pair<LabeledDataset, double>> out;
  out.reserve(law.datasets.size());
  for (std::size_t i = 0; i < law.datasets.size(); ++i)
    out.emplace_back(law.datasets[i], law.probabilities[i]);
  return out;
}

DataGeneratingLaw iid_product_law(const std::vector<std::pair<std::vector<double>, double>>& items,
                                  const std::vector<double>& item_probs, std::size_t n) {
  if (items.empty() || items.size() != item_probs.size())
    throw std::invalid_argument("product law: bad item list");
  if (n == 0) throw std::invalid_argument("product law: n must be positive");
  double total = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    total *= static_cast<double>(items.size());
    if (total > 1e6) throw std::length_error("product law: more than 1e6 datasets");
  }
  std::vector<LabeledDataset> datasets;
  std::vector<double> probs;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    LabeledDataset d;
    double p = 1.0;
    d.id = "z";
    for (std::size_t k = 0; k < n; ++k) {
      d.pairs.push_back(items[idx[k]]);
      p *= item_probs[idx[k]];
      d.id += "_" + std::to_string(idx[k]);
    }
    datasets.push_back(std::move(d));
    probs.push_back(p);
    // odometer, last position fastest
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < items.size()) break;
      idx[k] = 0;
      if (k == 0) return make_law(std::move(datasets), std::move(probs));
    }
  }
}

FiniteWorld make_world(const DataGeneratingLaw& law, const ModelSupport& support,
                       const LossSpec& spec) {
  FiniteWorld w;
  for (std::size_t i = 0; i < law.datasets.size(); ++i) {
    w.dataset_ids.push_back(law.datasets[i].id);
    w.probabilities.push_back(law.probabilities[i]);
    w.losses.push_back(loss_table(support, law.datasets[i], spec));
  }
  return w;
}

FiniteWorld load_world_csv(const std::string& path, const ModelSupport& support) {
  csv::Table t = csv::read_table(path);
  if (t.header.size() < 2 || t.header[0] != "dataset_id" || t.header[1] != "prob")
    throw std::runtime_error(path + ": expected leading columns dataset_id,prob");
  bool with_losses = t.header.size() > 2;
  if (with_losses) {
    if (t.header.size() != 2 + support.size())
      throw std::runtime_error(path + ": loss columns must match the support atom count");
    for (std::size_t i = 0; i < support.size(); ++i)
      if (t.header[2 + i] != support.atom_ids[i])
        throw std::runtime_error(path + ": loss column '" + t.header[2 + i] +
                                 "' does not match atom '" + support.atom_ids[i] + "'");
  }
  FiniteWorld w;
  double sum = 0.0;
  for (const auto& row : t.rows) {
    w.dataset_ids.push_back(row[0]);
    double p = csv::parse_double(row[1]);
    if (p < 0.0) throw std::runtime_error(path + ": negative probability");
    w.probabilities.push_back(p);
    sum += p;
    if (with_losses) {
      std::vector<double> vals;
      for (std::size_t i = 0; i < support.size(); ++i) vals.push_back(csv::parse_double(row[2 + i]));
      w.losses.push_back(make_loss_table(row[0], std::move(vals)));
    }
  }
  if (w.dataset_ids.empty()) throw std::runtime_error(path + ": no datasets");
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::runtime_error(path + ": probabilities must sum to 1");
  return w;
}

StochasticAlgorithm make_algorithm(std::vector<std::string> dataset_ids,
                                   std::vector<std::vector<double>> conditionals,
                                   const ModelSupport& support) {
  if (dataset_ids.size() != conditionals.size())
    throw std::invalid_argument("algorithm: ids/conditionals length mismatch");
  for (const auto& c : conditionals) {
    if (c.size() != support.size())
      throw std::invalid_argument("algorithm: conditional not aligned with support");
    double s = 0.0;
    for (double m : c) {
      if (!std::isfinite(m) || m < 0.0)
        throw std::invalid_argument("algorithm: masses must be nonnegative");
      s += m;
    }
    if (std::fabs(s - 1.0) > 1e-12)
      throw std::invalid_argument("algorithm: conditional masses must sum to 1");
  }
  return {std::move(dataset_ids), std::move(conditionals)};
}

StochasticAlgorithm load_algorithm_csv(const std::string& path, const ModelSupport& support,
                                       const std::vector<std::string>& dataset_ids) {
  csv::Table t = csv::read_table(path);
  if (t.header != std::vector<std::string>{"dataset_id", "atom_id", "mass"})
    throw std::runtime_error(path + ": expected header dataset_id,atom_id,mass");
  std::map<std::string, std::size_t> atom_index;
  for (std::size_t i = 0; i < support.size(); ++i) atom_index[support.atom_ids[i]] = i;
  std::map<std::string, std::size_t> ds_index;
  for (std::size_t i = 0; i < dataset_ids.size(); ++i) ds_index[dataset_ids[i]] = i;

  std::vector<std::vector<double>> cond(dataset_ids.size(), std::vector<double>(support.size(), 0.0));
  for (const auto& row : t.rows) {
    auto di = ds_index.find(row[0]);
    if (di == ds_index.end()) throw std::runtime_error(path + ": unknown dataset '" + row[0] + "'");
    auto ai = atom_index.find(row[1]);
    if (ai == atom_index.end()) throw std::runtime_error(path + ": unknown atom '" + row[1] + "'");
    cond[di->second][ai->second] += csv::parse_double(row[2]);
  }
  return make_algorithm(std::vector<std::string>(dataset_ids), std::move(cond), support);
}

}  // namespace fdr

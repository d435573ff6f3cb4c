#include "fdr/model_space.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fdr/csv.hpp"

namespace fdr {

namespace {
constexpr double kPruneThreshold = 1e-14;

ModelSupport finish_support(std::vector<std::string> ids, std::vector<double> weights,
                            std::vector<std::vector<double>> coords, SupportKind kind,
                            std::string rule) {
  if (ids.size() != weights.size())
    throw std::invalid_argument("support: ids/weights length mismatch");
  if (!coords.empty() && coords.size() != weights.size())
    throw std::invalid_argument("support: coords length mismatch");
  if (weights.empty()) throw std::invalid_argument("support: needs at least one atom");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("support: weights must be finite and nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("support: weights must sum to 1");

  ModelSupport s;
  s.kind = kind;
  s.rule = std::move(rule);
  double kept = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < kPruneThreshold) continue;
    s.atom_ids.push_back(std::move(ids[i]));
    s.weights.push_back(weights[i]);
    if (!coords.empty()) s.coords.push_back(std::move(coords[i]));
    kept += weights[i];
  }
  if (s.weights.empty()) throw std::invalid_argument("support: all atoms pruned");
  for (double& w : s.weights) w /= kept;
  return s;
}

ModelSupport quadrature_support(const gsl_integration_fixed_type* type, const char* rule,
                                const char* prefix, double a, double b, int nodes) {
  if (nodes < 1) throw std::invalid_argument("quadrature: node count must be positive");
  gsl_set_error_handler_off();
  gsl_integration_fixed_workspace* w =
      gsl_integration_fixed_alloc(type, static_cast<std::size_t>(nodes), a, b, 0.0, 0.0);
  if (!w) throw std::runtime_error("quadrature: node computation failed");
  const double* xs = gsl_integration_fixed_nodes(w);
  const double* ws = gsl_integration_fixed_weights(w);
  std::vector<std::string> ids;
  std::vector<double> weights;
  std::vector<std::vector<double>> coords;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) sum += ws[i];
  for (int i = 0; i < nodes; ++i) {
    ids.push_back(std::string(prefix) + std::to_string(i));
    weights.push_back(ws[i] / sum);
    coords.push_back({xs[i]});
  }
  gsl_integration_fixed_free(w);
  return finish_support(std::move(ids), std::move(weights), std::move(coords),
                        SupportKind::quadrature, rule);
}
}  // namespace

ModelSupport make_support(std::vector<std::string> ids, std::vector<double> weights,
                          std::vector<std::vector<double>> coords) {
  return finish_support(std::move(ids), std::move(weights), std::move(coords),
                        SupportKind::finite, "");
}

ModelSupport make_gauss_hermite_support(double mean, double sigma, int nodes) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gauss_hermite: sigma must be positive");
  // weight function exp(-b (x - a)^2) with b = 1/(2 sigma^2) is the unnormalized
  // normal density; sum-normalizing the weights makes them exact probabilities
  return quadrature_support(gsl_integration_fixed_hermite, "gauss_hermite", "gh", mean,
                            1.0 / (2.0 * sigma * sigma), nodes);
}

ModelSupport make_gauss_legendre_support(double lo, double hi, int nodes) {
  if (!(lo < hi)) throw std::invalid_argument("gauss_legendre: empty interval");
  return quadrature_support(gsl_integration_fixed_legendre, "gauss_legendre", "gl", lo, hi, nodes);
}

LossTable make_loss_table(std::string dataset_id, std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("loss table: values must be finite and nonnegative");
  }
  return {std::move(dataset_id), std::move(values)};
}

double expectation(const ModelSupport& support, const std::vector<double>& values) {
  if (values.size() != support.size()) throw std::invalid_argument("expectation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += support.weights[i] * values[i];
  return s;
}

Extremes essential_extremes(const ModelSupport& support, const LossTable& loss) {
  if (loss.values.size() != support.size())
    throw std::invalid_argument("essential_extremes: length mismatch");
  Extremes e{loss.values[0], loss.values[0]};
  for (double v : loss.values) {
    e.delta_star = std::min(e.delta_star, v);
    e.sup_loss = std::max(e.sup_loss, v);
  }
  return e;
}

double rashomon_mass(const ModelSupport& support, const LossTable& loss, double delta) {
  if (delta < 0.0) throw std::invalid_argument("rashomon_mass: delta must be nonnegative");
  if (loss.values.size() != support.size())
    throw std::invalid_argument("rashomon_mass: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (loss.values[i] <= delta) m += support.weights[i];
  return m;
}

bool is_separable(const ModelSupport& support, const LossTable& loss) {
  Extremes e = essential_extremes(support, loss);
  return e.delta_star < e.sup_loss;
}

SupportWithLoss load_support_csv(const std::string& path) {
  csv::Table t = csv::read_table(path);
  if (t.header != std::vector<std::string>{"atom_id", "weight", "loss"})
    throw std::runtime_error(path + ": expected header atom_id,weight,loss");
  std::vector<std::string> ids;
  std::vector<double> weights, losses;
  for (const auto& row : t.rows) {
    ids.push_back(row[0]);
    double w = csv::parse_double(row[1]);
    if (w < 0.0) throw std::runtime_error(path + ": negative weight");
    weights.push_back(w);
    losses.push_back(csv::parse_double(row[2]));
  }
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (std::fabs(sum - 1.0) > 1e-12) throw std::runtime_error(path + ": weights must sum to 1");
  // prune here so the loss column stays aligned with the kept atoms
  std::vector<std::string> kids;
  std::vector<double> kweights, klosses;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (weights[i] < kPruneThreshold) continue;
    kids.push_back(ids[i]);
    kweights.push_back(weights[i]);
    klosses.push_back(losses[i]);
  }
  if (kids.empty()) throw std::runtime_error(path + ": all atoms pruned");
  double kept = 0.0;
  for (double w : kweights) kept += w;
  for (double& w : kweights) w /= kept;
  SupportWithLoss out;
  out.support.atom_ids = std::move(kids);
  out.support.weights = std::move(kweights);
  out.loss = make_loss_table("", std::move(klosses));
  return out;
}

void write_support_csv(const std::string& path, const ModelSupport& support, const LossTable& loss) {
  if (loss.values.size() != support.size())
    throw std::invalid_argument("write_support_csv: length mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "atom_id,weight,loss\n";
  for (std::size_t i = 0; i < support.size(); ++i)
    out << support.atom_ids[i] << ',' << csv::fmt17(support.weights[i]) << ','
        << csv::fmt17(loss.values[i]) << '\n';
}

}  // namespace fdr

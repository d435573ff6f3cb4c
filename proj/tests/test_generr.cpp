#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fdr/divergence.hpp"
#include "fdr/generr.hpp"
#include "fdr/learning.hpp"
#include "fdr/model_space.hpp"
#include "fdr/numeric.hpp"
#include "fdr/solver.hpp"

using namespace fdr;

namespace {
ModelSupport uniform(std::size_t n) {
  std::vector<std::string> ids;
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("m" + std::to_string(i));
    w.push_back(1.0 / static_cast<double>(n));
  }
  return make_support(std::move(ids), std::move(w));
}

// Two atoms, two equally likely datasets whose losses are mirror images.
FiniteWorld mirror_world() {
  FiniteWorld w;
  w.dataset_ids = {"z0", "z1"};
  w.probabilities = {0.5, 0.5};
  w.losses = {make_loss_table("z0", {0.0, 1.0}), make_loss_table("z1", {1.0, 0.0})};
  return w;
}

FiniteWorld skew_world() {
  FiniteWorld w;
  w.dataset_ids = {"z0", "z1"};
  w.probabilities = {0.6, 0.4};
  w.losses = {make_loss_table("z0", {0.0, 1.0}), make_loss_table("z1", {1.0, 0.2})};
  return w;
}
}  // namespace

TEST_CASE("risk gap between two measures") {
  LossTable l = make_loss_table("z", {0.0, 1.0, 2.0});
  CHECK(gap({1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, l) == doctest::Approx(-2.0));
  CHECK(gap({0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, l) == 0.0);
}

TEST_CASE("marginal law mixes conditionals under the dataset weights") {
  ModelSupport s = uniform(2);
  FiniteWorld w = skew_world();
  StochasticAlgorithm alg =
      make_algorithm(w.dataset_ids, {{0.7, 0.3}, {0.2, 0.8}}, s);
  MarginalLaw m = marginal_model_law(alg, w, s);
  CHECK(m.weights[0] == doctest::Approx(0.6 * 0.7 + 0.4 * 0.2).epsilon(1e-15));
  CHECK(m.weights[1] == doctest::Approx(0.6 * 0.3 + 0.4 * 0.8).epsilon(1e-15));
  CHECK(m.strictly_positive);

  StochasticAlgorithm point =
      make_algorithm(w.dataset_ids, {{1.0, 0.0}, {1.0, 0.0}}, s);
  MarginalLaw mp = marginal_model_law(point, w, s);
  CHECK(mp.weights[1] == 0.0);
  CHECK_FALSE(mp.strictly_positive);
}

TEST_CASE("mirror world reference values across all four routes") {
  ModelSupport s = uniform(2);
  FiniteWorld w = mirror_world();
  Generator g = make_generator("kl");
  double lambda = 1.0;

  // Softmax posterior per dataset; the trained risk is the sigmoid tail and
  // the swap risk is its mirror, so the error is sigma(1) - 1/2.
  const double expected = 0.23105857863000487;

  StochasticAlgorithm alg = fdr_algorithm(g, w, s, lambda);
  GenErrReport rep = gen_err_report(alg, w, s, g, lambda, true);

  CHECK(rep.direct == doctest::Approx(expected).epsilon(1e-12));
  REQUIRE(rep.theorem5.has_value());
  REQUIRE(rep.theorem6.has_value());
  REQUIRE(rep.gibbs.has_value());
  CHECK(*rep.theorem5 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(*rep.theorem6 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(*rep.gibbs == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.routes_agree);
  CHECK(rep.max_spread <= 1e-9);

  REQUIRE(rep.table.size() == 2);
  for (const auto& row : rep.table) {
    CHECK(row.normalization == doctest::Approx(-1.3798854930417224).epsilon(1e-12));
    CHECK(row.risk_train == doctest::Approx(0.26894142136999516).epsilon(1e-12));
    CHECK(row.risk_marginal == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(row.gap == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("fdr_algorithm packages the per-dataset posteriors") {
  ModelSupport s = uniform(2);
  FiniteWorld w = skew_world();
  Generator g = make_generator("kl");
  StochasticAlgorithm alg = fdr_algorithm(g, w, s, 0.9);
  REQUIRE(alg.dataset_ids == w.dataset_ids);
  for (std::size_t z = 0; z < w.size(); ++z) {
    Posterior p = solve_posterior(g, s, w.losses[z], 0.9);
    CHECK(numeric::tv_distance(alg.conditionals[z], p.weights) <= 1e-12);
  }
}

TEST_CASE("conjugate-pair identity holds for any algorithm at any admissible lambda") {
  ModelSupport s = uniform(2);
  FiniteWorld w = skew_world();
  Generator g = make_generator("kl");
  StochasticAlgorithm alg =
      make_algorithm(w.dataset_ids, {{0.7, 0.3}, {0.2, 0.8}}, s);
  double direct = generalization_error_direct(alg, w, s);
  for (double lambda : {1.0, 0.7, 2.3}) {
    CAPTURE(lambda);
    double t5 = generalization_error_theorem5(alg, w, g, lambda, s);
    CHECK(t5 == doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("gap via conjugate equals the plain risk gap") {
  Generator g = make_generator("chi_squared");
  ModelSupport s = uniform(3);
  LossTable l = make_loss_table("z", {0.0, 1.0, 2.0});

  Posterior p = solve_posterior(g, s, l, 1.0);
  // Q against the posterior: R(Q) - R(P*) = 1 - 2/3.
  CHECK(gap_via_conjugate(s.weights, p, g, s, l, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  std::vector<double> other = {0.2, 0.5, 0.3};
  CHECK(gap_via_conjugate(other, p, g, s, l, 1.0) ==
        doctest::Approx(gap(other, p.weights, l)).epsilon(1e-11));

  // Boundary posterior with a clamped zero-mass atom exercises the
  // continuous extension of the bracket.
  Posterior pb = solve_posterior(g, s, l, 0.5);
  CHECK(pb.weights[2] == 0.0);
  CHECK(gap_via_conjugate(s.weights, pb, g, s, l, 0.5) ==
        doctest::Approx(gap(s.weights, pb.weights, l)).epsilon(1e-10));
  CHECK(gap_via_conjugate(s.weights, pb, g, s, l, 0.5) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("degenerate cases are exactly zero") {
  ModelSupport s = uniform(2);
  Generator g = make_generator("kl");

  // One dataset: nothing to generalize over.
  FiniteWorld w1;
  w1.dataset_ids = {"z0"};
  w1.probabilities = {1.0};
  w1.losses = {make_loss_table("z0", {0.3, 1.1})};
  StochasticAlgorithm a1 = fdr_algorithm(g, w1, s, 1.0);
  CHECK(generalization_error_direct(a1, w1, s) == 0.0);
  CHECK(generalization_error_theorem5(a1, w1, g, 1.0, s) == 0.0);
  CHECK(generalization_error_fdr(g, w1, s, 1.0) == 0.0);

  // Data-independent algorithm: the conditional never moves.
  FiniteWorld w2 = skew_world();
  StochasticAlgorithm fixed =
      make_algorithm(w2.dataset_ids, {{0.4, 0.6}, {0.4, 0.6}}, s);
  CHECK(generalization_error_direct(fixed, w2, s) == 0.0);
  CHECK(generalization_error_theorem5(fixed, w2, g, 1.0, s) == 0.0);
}

TEST_CASE("report for a non-regularized algorithm keeps only the applicable routes") {
  ModelSupport s = uniform(2);
  FiniteWorld w = skew_world();
  Generator g = make_generator("kl");
  StochasticAlgorithm alg =
      make_algorithm(w.dataset_ids, {{0.9, 0.1}, {0.1, 0.9}}, s);
  GenErrReport rep = gen_err_report(alg, w, s, g, 1.0, false);
  CHECK(rep.theorem5.has_value());
  CHECK_FALSE(rep.theorem6.has_value());
  CHECK_FALSE(rep.gibbs.has_value());
  CHECK(rep.routes_agree);
}

TEST_CASE("chi_squared report has no log route") {
  ModelSupport s = uniform(2);
  FiniteWorld w = mirror_world();
  Generator g = make_generator("chi_squared");
  double lambda = 1.5;
  StochasticAlgorithm alg = fdr_algorithm(g, w, s, lambda);
  GenErrReport rep = gen_err_report(alg, w, s, g, lambda, true);
  CHECK(rep.theorem5.has_value());
  CHECK(rep.theorem6.has_value());
  CHECK_FALSE(rep.gibbs.has_value());
  CHECK(rep.routes_agree);
  CHECK(rep.max_spread <= 1e-9);
}

TEST_CASE("inadmissible lambda leaves the conjugate route empty") {
  ModelSupport s = uniform(3);
  FiniteWorld w;
  w.dataset_ids = {"z0", "z1"};
  w.probabilities = {0.5, 0.5};
  w.losses = {make_loss_table("z0", {0.0, 1.0, 2.0}),
              make_loss_table("z1", {2.0, 1.0, 0.0})};
  Generator g = make_generator("chi_squared");
  StochasticAlgorithm alg =
      make_algorithm(w.dataset_ids, {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}}, s);
  // 0.4 sits below each dataset's threshold of 0.5.
  GenErrReport rep = gen_err_report(alg, w, s, g, 0.4, false);
  CHECK_FALSE(rep.theorem5.has_value());
  CHECK(std::isfinite(rep.direct));
}

TEST_CASE("generr csv layout with pinned route tokens") {
  ModelSupport s = uniform(2);
  FiniteWorld w = mirror_world();
  Generator g = make_generator("chi_squared");
  StochasticAlgorithm alg = fdr_algorithm(g, w, s, 1.5);
  GenErrReport rep = gen_err_report(alg, w, s, g, 1.5, true);

  std::ostringstream os;
  write_generr_csv(os, rep);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "route,value");
  REQUIRE(std::getline(is, line));
  CHECK(line.rfind("direct,", 0) == 0);
  REQUIRE(std::getline(is, line));
  CHECK(line.rfind("theorem5,", 0) == 0);
  REQUIRE(std::getline(is, line));
  CHECK(line.rfind("theorem6,", 0) == 0);
  REQUIRE(std::getline(is, line));
  CHECK(line.rfind("gibbs,", 0) == 0);
  CHECK(line == "gibbs,nan");  // no log route outside kl
  REQUIRE(std::getline(is, line));
  CHECK(line.empty());
  REQUIRE(std::getline(is, line));
  CHECK(line == "dataset_id,N,risk_train,risk_marginal,gap");
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("random worlds: all routes agree for kl and chi_squared") {
  numeric::Rng rng(314);
  for (int trial = 0; trial < 6; ++trial) {
    std::size_t atoms = static_cast<std::size_t>(rng.uniform_int(2, 4));
    std::size_t m = static_cast<std::size_t>(rng.uniform_int(2, 4));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < atoms; ++i) ids.push_back("a" + std::to_string(i));
    ModelSupport s = make_support(ids, rng.simplex(atoms));

    FiniteWorld w;
    std::vector<double> probs = rng.simplex(m);
    for (std::size_t z = 0; z < m; ++z) {
      w.dataset_ids.push_back("z" + std::to_string(z));
      w.probabilities.push_back(probs[z]);
      std::vector<double> L(atoms);
      for (auto& x : L) x = rng.uniform(0.0, 2.0);
      w.losses.push_back(make_loss_table(w.dataset_ids.back(), std::move(L)));
    }

    Generator g = make_generator_key(trial % 2 == 0 ? "kl" : "chi_squared");
    double lambda = 0.2;
    for (const auto& l : w.losses) {
      FeasibilityReport fr = feasibility(g, s, l, 1.0);
      lambda = std::max(lambda, fr.lambda_star * 1.05 + 0.2);
    }
    CAPTURE(trial);
    StochasticAlgorithm alg = fdr_algorithm(g, w, s, lambda);
    GenErrReport rep = gen_err_report(alg, w, s, g, lambda, true);
    CHECK(rep.routes_agree);
    CHECK(rep.max_spread <= 1e-9);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fdr/divergence.hpp"
#include "fdr/model_space.hpp"
#include "fdr/numeric.hpp"
#include "fdr/solver.hpp"

using namespace fdr;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

ModelSupport uniform(std::size_t n) {
  std::vector<std::string> ids;
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("m" + std::to_string(i));
    w.push_back(1.0 / static_cast<double>(n));
  }
  return make_support(std::move(ids), std::move(w));
}

LossTable lt(std::vector<double> v) { return make_loss_table("z", std::move(v)); }

// N for kl in closed form: the normalization equation collapses to a
// log-sum-exp because fdot_inv is the exponential.
double kl_normalization(const ModelSupport& s, const LossTable& l, double lambda) {
  std::vector<double> le(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    le[i] = std::log(s.weights[i]) - l.values[i] / lambda;
  return lambda * (numeric::log_sum_exp(le) - 1.0);
}
}  // namespace

TEST_CASE("feasible beta interval per family") {
  ModelSupport s = uniform(3);
  LossTable l = lt({0.0, 1.0, 2.0});

  BetaInterval kl = feasible_beta_interval(make_generator("kl"), s, l, 1.0);
  CHECK(kl.lo == -kInf);
  CHECK(kl.hi == kInf);

  // chi_squared: arguments must stay above j_lower = -2, binding at the
  // largest loss, so hi = -max L + 2 lambda.
  BetaInterval ch = feasible_beta_interval(make_generator("chi_squared"), s, l, 1.0);
  CHECK(ch.lo == -kInf);
  CHECK(ch.hi == doctest::Approx(0.0));
  BetaInterval ch2 = feasible_beta_interval(make_generator("chi_squared"), s, l, 2.0);
  CHECK(ch2.hi == doctest::Approx(2.0));

  // reverse_kl: arguments must stay below j_upper = 0, binding at the
  // smallest loss, so lo = -min L.
  BetaInterval rk = feasible_beta_interval(make_generator("reverse_kl"), s, l, 1.0);
  CHECK(rk.lo == doctest::Approx(0.0));
  CHECK(rk.hi == kInf);

  // hellinger_sq: j_upper = 1 scales with lambda.
  BetaInterval he = feasible_beta_interval(make_generator("hellinger_sq"), s, l, 1.0);
  CHECK(he.lo == doctest::Approx(-1.0));
  CHECK(he.hi == kInf);
  BetaInterval he3 = feasible_beta_interval(make_generator("hellinger_sq"), s, l, 3.0);
  CHECK(he3.lo == doctest::Approx(-3.0));
}

TEST_CASE("kl normalization matches log-sum-exp and posterior is the softmax") {
  Generator g = make_generator("kl");
  ModelSupport s = uniform(4);
  LossTable l = lt({0.1, 0.7, 1.3, 2.0});
  double lambda = 0.6;

  Posterior p = solve_posterior(g, s, l, lambda);
  CHECK(p.normalization == doctest::Approx(kl_normalization(s, l, lambda)).epsilon(1e-12));

  std::vector<double> soft(s.size());
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    soft[i] = s.weights[i] * std::exp(-l.values[i] / lambda);
    z += soft[i];
  }
  for (auto& x : soft) x /= z;
  CHECK(numeric::tv_distance(p.weights, soft) <= 1e-12);
}

TEST_CASE("kl two-atom reference values") {
  Generator g = make_generator("kl");
  ModelSupport s = uniform(2);
  LossTable l = lt({0.0, 1.0});
  Posterior p = solve_posterior(g, s, l, 1.0);
  CHECK(p.normalization == doctest::Approx(-1.3798854930417224).epsilon(1e-13));
  CHECK(p.weights[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-13));
  CHECK(p.risk == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-13));
  GapReport gap = duality_gap(g, s, l, 1.0, p);
  CHECK(gap.gap < 1e-10);
}

TEST_CASE("chi_squared multiplier is minus the reference mean loss") {
  Generator g = make_generator("chi_squared");
  ModelSupport s = uniform(3);
  LossTable l = lt({0.0, 1.0, 2.0});

  for (double lambda : {1.0, 5.0}) {
    Posterior p = solve_posterior(g, s, l, lambda);
    CHECK(p.normalization == doctest::Approx(-1.0).epsilon(1e-10));
  }

  Posterior p = solve_posterior(g, s, l, 1.0);
  CHECK(p.rnd[0] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(p.rnd[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(p.rnd[2] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(p.weights[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(p.divergence == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
  CHECK(p.risk == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(p.eta == p.divergence);
}

TEST_CASE("admissibility threshold and the infeasible error") {
  Generator g = make_generator("chi_squared");
  ModelSupport s = uniform(3);
  LossTable l = lt({0.0, 1.0, 2.0});

  FeasibilityReport fr = feasibility(g, s, l, 0.4);
  CHECK_FALSE(fr.admissible);
  CHECK(fr.lambda_star == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fr.boundary_included);

  CHECK(is_admissible(g, s, l, 0.6));
  CHECK_FALSE(is_admissible(g, s, l, 0.4));

  bool threw = false;
  try {
    solve_posterior(g, s, l, 0.4);
  } catch (const InfeasibleLambdaError& e) {
    threw = true;
    CHECK(e.lambda_star() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(e.boundary_included());
    CHECK(std::string(e.what()).find("lambda_star=0.5") != std::string::npos);
  }
  CHECK(threw);

  // kl admits every positive lambda: f'(0+) = -inf.
  FeasibilityReport frk = feasibility(make_generator("kl"), s, l, 1e-3);
  CHECK(frk.admissible);
  CHECK(frk.lambda_star == 0.0);
}

TEST_CASE("boundary lambda solves with a clamped zero-mass atom") {
  Generator g = make_generator("chi_squared");
  ModelSupport s = uniform(3);
  LossTable l = lt({0.0, 1.0, 2.0});

  Posterior p = solve_posterior(g, s, l, 0.5);
  CHECK(p.normalization == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(p.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(p.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(p.weights[2] == 0.0);
  // f(0) = 1 enters the divergence through the vanished atom.
  CHECK(p.divergence == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  GapReport gap = duality_gap(g, s, l, 0.5, p);
  CHECK(gap.gap < 1e-10);
}

TEST_CASE("reverse_kl two-atom closed form") {
  // Normalization equation: (1/2)(lambda/b + lambda/(b+1)) = 1 at lambda = 1
  // gives 2 b^2 = 1, so b = 1/sqrt(2).
  Generator g = make_generator("reverse_kl");
  ModelSupport s = uniform(2);
  LossTable l = lt({0.0, 1.0});
  Posterior p = solve_posterior(g, s, l, 1.0);
  double b = 1.0 / std::sqrt(2.0);
  CHECK(p.normalization == doctest::Approx(b).epsilon(1e-10));
  CHECK(p.rnd[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(p.rnd[1] == doctest::Approx(1.0 / (b + 1.0)).epsilon(1e-10));
}

TEST_CASE("dual route agrees with the root route across the catalog") {
  ModelSupport s = make_support({"a", "b", "c", "d", "e"}, {0.3, 0.25, 0.2, 0.15, 0.1});
  LossTable l = lt({0.05, 0.6, 1.1, 1.6, 1.9});
  // 2.5 clears every family's threshold here (alpha:3 needs about 1.83).
  double lambda = 2.5;
  for (std::string key : {"kl", "reverse_kl", "chi_squared", "hellinger_sq", "alpha:0.5",
                          "alpha:1.5", "alpha:2", "alpha:3"}) {
    CAPTURE(key);
    Generator g = make_generator_key(key);
    NormalizationResult nr = normalization_constant(g, s, l, lambda);
    CHECK(std::fabs(nr.beta_root - nr.beta_dual) <= 1e-9);
    Posterior p = solve_posterior(g, s, l, lambda);
    GapReport gap = duality_gap(g, s, l, lambda, p);
    CHECK(gap.gap < 1e-8);
    CHECK(gap.dual == doctest::Approx(-nr.dual_value).epsilon(1e-9));
  }
}

TEST_CASE("tilted measure: chi_squared tilts back to the reference") {
  Generator g = make_generator("chi_squared");
  ModelSupport s = uniform(3);
  LossTable l = lt({0.0, 1.0, 2.0});
  Posterior p = solve_posterior(g, s, l, 1.0);
  std::vector<double> tw = tilted_measure(g, p, s);
  CHECK(numeric::tv_distance(tw, s.weights) <= 1e-12);
  // N is constant in lambda, so the sensitivity is exactly zero.
  CHECK(std::fabs(normalization_derivative(g, s, l, 1.0, p)) <= 1e-12);
}

TEST_CASE("tilted measure: kl tilts to the posterior itself") {
  Generator g = make_generator("kl");
  ModelSupport s = uniform(3);
  LossTable l = lt({0.2, 0.9, 1.7});
  Posterior p = solve_posterior(g, s, l, 0.8);
  std::vector<double> tw = tilted_measure(g, p, s);
  CHECK(numeric::tv_distance(tw, p.weights) <= 1e-12);
  // Independent closed form for kl: dN/dlambda = -(1 + divergence).
  double dn = normalization_derivative(g, s, l, 0.8, p);
  CHECK(dn == doctest::Approx(-(1.0 + p.divergence)).epsilon(1e-10));
}

TEST_CASE("sensitivity formula matches a finite difference of N") {
  ModelSupport s = make_support({"a", "b", "c", "d"}, {0.4, 0.3, 0.2, 0.1});
  LossTable l = lt({0.3, 0.8, 1.2, 1.9});
  for (const char* key : {"kl", "reverse_kl", "hellinger_sq", "alpha:1.5"}) {
    CAPTURE(key);
    Generator g = make_generator_key(key);
    double lambda = 1.1;
    Posterior p = solve_posterior(g, s, l, lambda);
    double dn = normalization_derivative(g, s, l, lambda, p);
    double h = 1e-5 * lambda;
    double np = solve_posterior(g, s, l, lambda + h).normalization;
    double nm = solve_posterior(g, s, l, lambda - h).normalization;
    double fd = (np - nm) / (2.0 * h);
    CHECK(dn == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("constant losses give back the reference measure") {
  ModelSupport s = uniform(3);
  LossTable l = lt({0.7, 0.7, 0.7});
  double lambda = 0.8;
  struct Row {
    const char* key;
    double n;
  };
  // N = -c - lambda * fdot(1); fdot(1) is 1 for kl, -1 for reverse_kl, and 0
  // for the families whose derivative vanishes at 1.
  const Row rows[] = {{"kl", -1.5}, {"reverse_kl", 0.1}, {"chi_squared", -0.7},
                      {"hellinger_sq", -0.7}, {"alpha:1.5", -0.7}};
  for (const Row& r : rows) {
    CAPTURE(r.key);
    Generator g = make_generator_key(r.key);
    Posterior p = solve_posterior(g, s, l, lambda);
    CHECK_FALSE(p.separable);
    CHECK(numeric::tv_distance(p.weights, s.weights) == 0.0);
    CHECK(p.divergence == 0.0);
    CHECK(p.risk == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p.normalization == doctest::Approx(r.n).epsilon(1e-9));
    GapReport gap = duality_gap(g, s, l, lambda, p);
    CHECK(gap.gap < 1e-9);
  }
}

TEST_CASE("sweep: kl normalization genuinely decreases") {
  Generator g = make_generator("kl");
  ModelSupport s = uniform(2);
  LossTable l = lt({0.0, 1.0});
  std::vector<double> grid = {0.5, 1.0, 2.0};
  std::vector<SweepRow> rows = sweep(g, s, l, grid);

  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.admissible);
    CHECK(r.normalization == doctest::Approx(kl_normalization(s, l, r.lambda)).epsilon(1e-10));
    CHECK(r.gap < 1e-8);
  }
  CHECK(rows[1].normalization == doctest::Approx(-1.3798854930417224).epsilon(1e-12));
  CHECK(rows[0].normalization > rows[1].normalization);
  CHECK(rows[1].normalization > rows[2].normalization);
  CHECK_FALSE(sweep_monotone(rows));

  // The derivative column must track the closed form -(1 + divergence).
  for (const auto& r : rows)
    CHECK(r.dn_dlambda == doctest::Approx(-(1.0 + r.divergence)).epsilon(1e-9));
}

TEST_CASE("sweep: reverse_kl normalization increases, chi_squared stays flat") {
  ModelSupport s = uniform(2);
  LossTable l = lt({0.0, 1.0});
  std::vector<SweepRow> rk =
      sweep(make_generator("reverse_kl"), s, l, log_spaced(0.25, 4.0, 7));
  CHECK(sweep_monotone(rk));
  for (std::size_t i = 1; i < rk.size(); ++i)
    CHECK(rk[i].normalization > rk[i - 1].normalization);

  ModelSupport s3 = uniform(3);
  LossTable l3 = lt({0.0, 1.0, 2.0});
  std::vector<SweepRow> ch =
      sweep(make_generator("chi_squared"), s3, l3, log_spaced(0.6, 5.0, 5));
  CHECK(sweep_monotone(ch));
  for (const auto& r : ch) CHECK(r.normalization == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("sweep records inadmissible rows as nan without failing") {
  Generator g = make_generator("chi_squared");
  ModelSupport s = uniform(3);
  LossTable l = lt({0.0, 1.0, 2.0});
  std::vector<SweepRow> rows = sweep(g, s, l, {0.3, 0.45, 0.6});
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].admissible);
  CHECK(std::isnan(rows[0].normalization));
  CHECK(std::isnan(rows[1].gap));
  CHECK(rows[2].admissible);
  CHECK(std::isfinite(rows[2].dn_dlambda));

  CHECK_THROWS_AS(sweep(g, s, l, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("sweep csv layout") {
  Generator g = make_generator("kl");
  ModelSupport s = uniform(2);
  LossTable l = lt({0.0, 1.0});
  std::vector<SweepRow> rows = sweep(g, s, l, {0.5, 1.0, 2.0});

  std::ostringstream os;
  write_sweep_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "lambda,admissible,N,risk,divergence,eta,primal,dual,gap,dN_dlambda");
  int data_lines = 0;
  std::string last;
  while (std::getline(is, line)) {
    last = line;
    if (!line.empty() && line[0] != '#') ++data_lines;
  }
  CHECK(data_lines == 3);
  CHECK(last == "# N_monotone=false");

  // Inadmissible rows print nan fields under flag 0.
  std::vector<SweepRow> mixed =
      sweep(make_generator("chi_squared"), uniform(3), lt({0.0, 1.0, 2.0}), {0.3, 1.0});
  std::ostringstream os2;
  write_sweep_csv(os2, mixed);
  CHECK(os2.str().find(",0,nan,") != std::string::npos);
  CHECK(os2.str().find("# N_monotone=true") != std::string::npos);
}

TEST_CASE("log-spaced grids") {
  std::vector<double> v = log_spaced(0.1, 10.0, 5);
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 0.1);
  CHECK(v.back() == 10.0);
  CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);

  std::vector<double> one = log_spaced(2.0, 7.0, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 2.0);

  CHECK_THROWS_AS(log_spaced(1.0, 2.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(log_spaced(-1.0, 2.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(log_spaced(3.0, 2.0, 3), std::invalid_argument);
}

TEST_CASE("solver input validation") {
  Generator g = make_generator("kl");
  ModelSupport s = uniform(2);
  CHECK_THROWS_AS(solve_posterior(g, s, lt({0.0, 1.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_posterior(g, s, lt({0.0, 1.0}), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_posterior(g, s, lt({0.0, 1.0, 2.0}), 1.0), std::invalid_argument);
}

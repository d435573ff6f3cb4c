#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "doctest.h"
#include "fdr/model_space.hpp"

using namespace fdr;

TEST_CASE("make_support validates and normalizes") {
  ModelSupport s = make_support({"a", "b", "c"}, {0.2, 0.3, 0.5});
  CHECK(s.size() == 3);
  CHECK(s.weights[2] == doctest::Approx(0.5));
  CHECK(s.kind == SupportKind::finite);

  CHECK_THROWS_AS(make_support({"a"}, {0.5}), std::invalid_argument);             // sum != 1
  CHECK_THROWS_AS(make_support({"a", "b"}, {1.2, -0.2}), std::invalid_argument);  // negative
  CHECK_THROWS_AS(make_support({"a", "b"}, {1.0}), std::invalid_argument);        // shape
}

TEST_CASE("zero-mass atoms are pruned and the rest renormalized") {
  ModelSupport s = make_support({"a", "b", "c"}, {0.5, 1e-16, 0.5 - 1e-16});
  CHECK(s.size() == 2);
  CHECK(s.atom_ids[1] == "c");
  CHECK(s.weights[0] + s.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("expectation and loss table") {
  ModelSupport s = make_support({"a", "b"}, {0.25, 0.75});
  LossTable t = make_loss_table("z", {2.0, 4.0});
  CHECK(expectation(s, t.values) == doctest::Approx(3.5));
  CHECK_THROWS_AS(make_loss_table("z", {-1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_loss_table("z", {std::nan(""), 0.0}), std::invalid_argument);
}

TEST_CASE("essential extremes, rashomon mass, separability") {
  ModelSupport s = make_support({"a", "b", "c"}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  LossTable t = make_loss_table("z", {0.0, 1.0, 2.0});
  Extremes e = essential_extremes(s, t);
  CHECK(e.delta_star == 0.0);
  CHECK(e.sup_loss == 2.0);
  CHECK(rashomon_mass(s, t, 0.0) == doctest::Approx(1.0 / 3));
  CHECK(rashomon_mass(s, t, 1.5) == doctest::Approx(2.0 / 3));
  CHECK_THROWS_AS(rashomon_mass(s, t, -0.1), std::invalid_argument);
  CHECK(is_separable(s, t));
  CHECK_FALSE(is_separable(s, make_loss_table("z", {0.7, 0.7, 0.7})));
}

TEST_CASE("gauss hermite support reproduces gaussian moments") {
  ModelSupport s = make_gauss_hermite_support(1.5, 0.5, 32);
  CHECK(s.kind == SupportKind::quadrature);
  double sum = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += s.weights[i];
    m1 += s.weights[i] * s.coords[i][0];
    m2 += s.weights[i] * s.coords[i][0] * s.coords[i][0];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m1 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m2 - m1 * m1 == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("gauss legendre support reproduces uniform moments") {
  ModelSupport s = make_gauss_legendre_support(-1.0, 3.0, 24);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    m1 += s.weights[i] * s.coords[i][0];
    m2 += s.weights[i] * s.coords[i][0] * s.coords[i][0];
  }
  CHECK(m1 == doctest::Approx(1.0).epsilon(1e-12));
  // E[x^2] on U[-1,3] = (27 + 1)/12
  CHECK(m2 == doctest::Approx(28.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("support csv round trip") {
  ModelSupport s = make_support({"a0", "a1"}, {0.125, 0.875});
  LossTable t = make_loss_table("z", {0.25, 1.75});
  std::string path = "test_support_roundtrip.csv";
  write_support_csv(path, s, t);
  SupportWithLoss back = load_support_csv(path);
  REQUIRE(back.support.size() == 2);
  CHECK(back.support.atom_ids[0] == "a0");
  CHECK(back.support.weights[1] == 0.875);  // fmt17 round-trips doubles exactly
  CHECK(back.loss.values[1] == 1.75);
  std::remove(path.c_str());
}

TEST_CASE("support csv rejects junk") {
  std::string path = "test_support_bad.csv";
  {
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("atom,w,l\na,0.5,0\nb,0.5,1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS(load_support_csv(path));
  {
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("atom_id,weight,loss\na,0.5,zero\nb,0.5,1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS(load_support_csv(path));
  std::remove(path.c_str());
  CHECK_THROWS(load_support_csv("does_not_exist.csv"));
}

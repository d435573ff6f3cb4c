#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fdr::numeric {

// log(sum_i exp(v_i)) with max-shift; -inf for an empty input.
double log_sum_exp(const std::vector<double>& v);

// 0.5 * sum_i |a_i - b_i|
double tv_distance(const std::vector<double>& a, const std::vector<double>& b);

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  int evals = 0;
  std::vector<double> iterates;
};

// Root of a strictly decreasing function on a bracket [a, b] with
// fn(a) > 0 > fn(b). Alternates bisection with secant steps; endpoint
// values may be infinite. Stops at |fn(x)| <= target or when the
// bracket collapses to rounding width.
RootResult decreasing_root(const std::function<double(double)>& fn, double a, double b,
                           double fa, double fb, double target, int max_iter = 200);

struct MinResult {
  double x = 0.0;
  double value = 0.0;
  int evals = 0;
  std::vector<double> iterates;
};

// Golden-section minimization of a convex function on [a, b], run until the
// bracket width drops below xtol.
MinResult golden_min(const std::function<double(double)>& fn, double a, double b,
                     double xtol, int max_iter = 400);

// Fourth-order central difference (8(f(x+h)-f(x-h)) - (f(x+2h)-f(x-2h))) / (12h).
double richardson_derivative(const std::function<double(double)>& fn, double x, double h);

// Fourth-order one-sided difference using x, x-h, ..., x-4h only. For
// derivatives at or near the right edge of the smooth region.
double left_derivative(const std::function<double(double)>& fn, double x, double h);

// Deterministic uniforms built directly on the mt19937_64 stream so output
// does not depend on the standard library's distribution implementations.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  int uniform_int(int lo, int hi);        // {lo, ..., hi}
  std::vector<double> simplex(std::size_t n);
};

}  // namespace fdr::numeric

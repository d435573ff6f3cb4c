#include "fdr/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdr::numeric {

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return 0.5 * s;
}

RootResult decreasing_root(const std::function<double(double)>& fn, double a, double b,
                           double fa, double fb, double target, int max_iter) {
  if (!(a < b)) throw std::invalid_argument("decreasing_root: empty bracket");
  if (!(fa > 0.0) || !(fb < 0.0)) throw std::invalid_argument("decreasing_root: not a sign bracket");
  RootResult r;
  double best_x = (std::fabs(fa) < std::fabs(fb) && std::isfinite(fa)) ? a : b;
  double best_f = std::isfinite(fa) && std::fabs(fa) < std::fabs(fb) ? fa : fb;
  for (int it = 0; it < max_iter; ++it) {
    double x;
    bool use_secant = (it % 2 == 1) && std::isfinite(fa) && std::isfinite(fb) && fa != fb;
    if (use_secant) {
      x = b - fb * (b - a) / (fb - fa);
      double w = b - a;
      if (!std::isfinite(x) || x <= a + 0.01 * w || x >= b - 0.01 * w) x = 0.5 * (a + b);
    } else {
      x = 0.5 * (a + b);
    }
    double fx = fn(x);
    ++r.evals;
    r.iterates.push_back(x);
    if (std::isfinite(fx) && std::fabs(fx) < std::fabs(best_f)) {
      best_f = fx;
      best_x = x;
    }
    if (std::fabs(fx) <= target) {
      r.x = x;
      r.residual = fx;
      return r;
    }
    if (fx > 0.0) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::fabs(a), std::fabs(b)}))
      break;
  }
  r.x = best_x;
  r.residual = best_f;
  return r;
}

MinResult golden_min(const std::function<double(double)>& fn, double a, double b,
                     double xtol, int max_iter) {
  if (!(a < b)) throw std::invalid_argument("golden_min: empty bracket");
  constexpr double invphi = 0.6180339887498949;
  MinResult r;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  r.evals = 2;
  for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = fn(x2);
    }
    ++r.evals;
    r.iterates.push_back(0.5 * (a + b));
  }
  r.x = f1 <= f2 ? x1 : x2;
  r.value = std::min(f1, f2);
  return r;
}

double richardson_derivative(const std::function<double(double)>& fn, double x, double h) {
  double d1 = fn(x + h) - fn(x - h);
  double d2 = fn(x + 2.0 * h) - fn(x - 2.0 * h);
  return (8.0 * d1 - d2) / (12.0 * h);
}

double left_derivative(const std::function<double(double)>& fn, double x, double h) {
  return (25.0 * fn(x) - 48.0 * fn(x - h) + 36.0 * fn(x - 2.0 * h) -
          16.0 * fn(x - 3.0 * h) + 3.0 * fn(x - 4.0 * h)) /
         (12.0 * h);
}

double Rng::uniform() {
  // 53 random bits into [0, 1)
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(eng() % span);
}

std::vector<double> Rng::simplex(std::size_t n) {
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - uniform());  // exp(1) variate
    s += x;
  }
  for (auto& x : w) x /= s;
  return w;
}

}  // namespace fdr::numeric

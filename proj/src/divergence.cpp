#include "fdr/divergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void domain_fail(const Generator& gen, double t) {
  throw std::domain_error("fdot_inv(" + std::to_string(t) + ") outside J for generator " + gen.key());
}
}  // namespace

double Generator::f(double x) const {
  switch (family_) {
    case Family::kl:
      return x * std::log(x);
    case Family::reverse_kl:
      return -std::log(x);
    case Family::chi_squared:
      return (x - 1.0) * (x - 1.0);
    case Family::hellinger_sq: {
      double d = std::sqrt(x) - 1.0;
      return d * d;
    }
    case Family::alpha:
      return (std::pow(x, alpha_) - 1.0 - alpha_ * (x - 1.0)) / (alpha_ * (alpha_ - 1.0));
  }
  return 0.0;
}

double Generator::fdot(double x) const {
  switch (family_) {
    case Family::kl:
      return std::log(x) + 1.0;
    case Family::reverse_kl:
      return -1.0 / x;
    case Family::chi_squared:
      return 2.0 * (x - 1.0);
    case Family::hellinger_sq:
      return 1.0 - 1.0 / std::sqrt(x);
    case Family::alpha:
      return (std::pow(x, alpha_ - 1.0) - 1.0) / (alpha_ - 1.0);
  }
  return 0.0;
}

double Generator::fddot(double x) const {
  switch (family_) {
    case Family::kl:
      return 1.0 / x;
    case Family::reverse_kl:
      return 1.0 / (x * x);
    case Family::chi_squared:
      return 2.0;
    case Family::hellinger_sq:
      return 0.5 * std::pow(x, -1.5);
    case Family::alpha:
      return std::pow(x, alpha_ - 2.0);
  }
  return 0.0;
}

double Generator::j_lower() const {
  switch (family_) {
    case Family::chi_squared:
      return -2.0;
    case Family::alpha:
      return alpha_ > 1.0 ? -1.0 / (alpha_ - 1.0) : -kInf;
    default:
      return -kInf;
  }
}

double Generator::j_upper() const {
  switch (family_) {
    case Family::reverse_kl:
      return 0.0;
    case Family::hellinger_sq:
      return 1.0;
    case Family::alpha:
      return alpha_ < 1.0 ? 1.0 / (1.0 - alpha_) : kInf;
    default:
      return kInf;
  }
}

double Generator::fdot_inv(double t) const {
  if (!(t > j_lower() && t < j_upper())) domain_fail(*this, t);
  switch (family_) {
    case Family::kl:
      return std::exp(t - 1.0);
    case Family::reverse_kl:
      return -1.0 / t;
    case Family::chi_squared:
      return 1.0 + 0.5 * t;
    case Family::hellinger_sq: {
      double u = 1.0 - t;
      return 1.0 / (u * u);
    }
    case Family::alpha:
      return std::pow(1.0 + (alpha_ - 1.0) * t, 1.0 / (alpha_ - 1.0));
  }
  return 0.0;
}

double Generator::fdot_inv_ext(double t) const {
  double lo = j_lower();
  if (std::isfinite(lo) && t <= lo) return 0.0;
  return fdot_inv(t);
}

double Generator::f_at_zero() const {
  switch (family_) {
    case Family::kl:
      return 0.0;
    case Family::reverse_kl:
      return kInf;
    case Family::chi_squared:
    case Family::hellinger_sq:
      return 1.0;
    case Family::alpha:
      return alpha_ > 0.0 ? 1.0 / alpha_ : kInf;
  }
  return 0.0;
}

double Generator::conjugate(double t) const {
  double lo = j_lower(), hi = j_upper();
  if (std::isfinite(lo) && t <= lo) return -f_at_zero();  // sup attained as x -> 0+
  if (t >= hi) return kInf;
  switch (family_) {
    case Family::kl:
      return std::exp(t - 1.0);
    case Family::reverse_kl:
      return -1.0 - std::log(-t);
    case Family::chi_squared:
      return t + 0.25 * t * t;
    case Family::hellinger_sq:
      return t / (1.0 - t);
    case Family::alpha: {
      double s = 1.0 + (alpha_ - 1.0) * t;
      return (std::pow(s, alpha_ / (alpha_ - 1.0)) - 1.0) / alpha_;
    }
  }
  return 0.0;
}

ZeroLimit Generator::zero_limit() const {
  switch (family_) {
    case Family::chi_squared:
      return {true, -2.0};
    case Family::alpha:
      if (alpha_ > 1.0) return {true, -1.0 / (alpha_ - 1.0)};
      return {false, 0.0};
    default:
      return {false, 0.0};
  }
}

Generator make_generator(const std::string& name, std::optional<double> alpha) {
  Generator g;
  if (name == "kl") {
    g.family_ = Family::kl;
  } else if (name == "reverse_kl") {
    g.family_ = Family::reverse_kl;
  } else if (name == "chi_squared") {
    g.family_ = Family::chi_squared;
  } else if (name == "hellinger_sq") {
    g.family_ = Family::hellinger_sq;
  } else if (name == "alpha") {
    g.family_ = Family::alpha;
  } else {
    throw std::invalid_argument("unknown divergence generator: " + name);
  }
  if (g.family_ == Family::alpha) {
    if (!alpha) throw std::invalid_argument("alpha family needs its parameter");
    double a = *alpha;
    if (!std::isfinite(a) || a == 0.0 || a == 1.0)
      throw std::invalid_argument("alpha parameter must be finite and outside {0, 1}");
    g.alpha_ = a;
    g.key_ = "alpha:" + std::to_string(a);
  } else {
    if (alpha) throw std::invalid_argument("alpha parameter given for non-alpha generator");
    g.key_ = name;
  }
  return g;
}

Generator make_generator_key(const std::string& key) {
  auto pos = key.find(':');
  if (pos == std::string::npos) return make_generator(key);
  std::string name = key.substr(0, pos);
  std::string arg = key.substr(pos + 1);
  std::size_t used = 0;
  double a;
  try {
    a = std::stod(arg, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad generator key: " + key);
  }
  if (used != arg.size()) throw std::invalid_argument("bad generator key: " + key);
  return make_generator(name, a);
}

ZeroLimit classify_zero_limit(const Generator& gen) { return gen.zero_limit(); }

ConformanceReport check_generator(const Generator& gen, const std::vector<double>& grid) {
  ConformanceReport rep;
  bool any = false;
  bool ok = true;
  for (double x : grid) {
    PointCheck pc;
    pc.x = x;
    pc.in_domain = std::isfinite(x) && x > 0.0;
    if (!pc.in_domain) {
      rep.points.push_back(pc);
      continue;
    }
    any = true;
    double fd = gen.fdot(x);
    pc.inv_residual = std::fabs(gen.fdot_inv(fd) - x) / x;

    double fref = x * fd - gen.f(x);
    pc.fenchel_residual = std::fabs(gen.conjugate(fd) - fref) / std::max(1.0, std::fabs(fref));

    // Step proportional to x: every catalog generator's curvature scales like
    // a power of x, so a fixed step is far too coarse near zero.
    double h = 1e-6 * x;
    double cd1 = (gen.f(x + h) - gen.f(x - h)) / (2.0 * h);
    pc.fdot_residual = std::fabs(cd1 - fd) / std::max(1.0, std::fabs(fd));
    double cd2 = (gen.fdot(x + h) - gen.fdot(x - h)) / (2.0 * h);
    pc.fddot_residual = std::fabs(cd2 - gen.fddot(x)) / std::max(1.0, std::fabs(gen.fddot(x)));

    double w = std::max({pc.inv_residual, pc.fenchel_residual, pc.fdot_residual, pc.fddot_residual});
    rep.worst = std::max(rep.worst, w);
    if (w >= 1e-6) ok = false;
    rep.points.push_back(pc);
  }
  rep.pass = any && ok;
  return rep;
}

}  // namespace fdr

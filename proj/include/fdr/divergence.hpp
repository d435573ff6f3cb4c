#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fdr {

enum class Family { kl, reverse_kl, chi_squared, hellinger_sq, alpha };

// lim_{x->0+} f'(x): either a finite value or -infinity. (A +infinity limit
// cannot occur for a convex generator with increasing derivative on (0,inf).)
struct ZeroLimit {
  bool finite = false;
  double value = 0.0;  // meaningful only when finite
};

// A convex divergence generator f with f(1) = 0 together with its calculus:
// derivative fdot, inverse derivative fdot_inv on the open interval J,
// second derivative fddot, and the convex conjugate. Pure value type.
class Generator {
 public:
  double f(double x) const;         // x > 0
  double fdot(double x) const;      // x > 0
  double fddot(double x) const;     // x > 0, always positive
  double fdot_inv(double t) const;  // throws std::domain_error outside open J

  // Continuous extension of fdot_inv to a finite left endpoint of J, where its
  // value is 0. Throws at or above the upper endpoint, same as fdot_inv.
  double fdot_inv_ext(double t) const;

  // sup_{x>0} (t*x - f(x)): closed form inside J, clamped to -f(0) at and
  // below a finite lower endpoint of J, +inf sentinel at and above sup J.
  double conjugate(double t) const;

  double j_lower() const;   // J = (j_lower, j_upper), ends may be infinite
  double j_upper() const;
  double f_at_zero() const; // lim_{x->0+} f(x), may be +inf
  ZeroLimit zero_limit() const;

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  const std::string& key() const { return key_; }

 private:
  friend Generator make_generator(const std::string&, std::optional<double>);
  Family family_ = Family::kl;
  double alpha_ = 0.0;
  std::string key_;
};

// name in {kl, reverse_kl, chi_squared, hellinger_sq, alpha}; alpha parameter
// required exactly for the alpha family, with alpha not in {0, 1}.
Generator make_generator(const std::string& name, std::optional<double> alpha = std::nullopt);

// Accepts the config-key spelling, e.g. "kl" or "alpha:1.5".
Generator make_generator_key(const std::string& key);

ZeroLimit classify_zero_limit(const Generator& gen);

struct PointCheck {
  double x = 0.0;
  bool in_domain = false;
  double inv_residual = 0.0;      // |fdot_inv(fdot(x)) - x| / x
  double fenchel_residual = 0.0;  // |f*(fdot(x)) - (x*fdot(x) - f(x))|, relative
  double fdot_residual = 0.0;     // central difference of f vs fdot, relative
  double fddot_residual = 0.0;    // central difference of fdot vs fddot, relative
};

struct ConformanceReport {
  bool pass = false;
  double worst = 0.0;
  std::vector<PointCheck> points;
};

// Identity checks on a grid of x values; points outside (0,inf) are flagged
// but not fatal. PASS means every in-domain residual is below 1e-6.
ConformanceReport check_generator(const Generator& gen, const std::vector<double>& grid);

}  // namespace fdr

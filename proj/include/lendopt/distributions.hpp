#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lendopt/numerics.hpp"

namespace lendopt {

struct Assumption1Report {
  bool monotone = false;
  double g_at_zero = 0.0;
  double g_at_upper = 0.0;
};

/// Income distribution on (0, u) with the hazard machinery used by the
/// lending recursions: G(x) = x f(x) / (1 - F(x)), its inverse, and
/// conditional (truncated-below) survival. Immutable after construction.
///
/// survival(x) is P(theta >= x), left-continuous, so atoms of the two-point
/// family count toward survival at their own location.
class IncomeDistribution {
 public:
  enum class Kind { Uniform, Beta, Gamma, Weibull, TwoPoint, Empirical };

  static IncomeDistribution uniform();
  static IncomeDistribution beta(double a, double b);
  static IncomeDistribution gamma(double shape, double scale);
  static IncomeDistribution weibull(double k, double lambda);
  static IncomeDistribution two_point(double center, double spread);
  static IncomeDistribution empirical(std::vector<double> x, std::vector<double> cdf);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool continuous() const { return kind_ != Kind::TwoPoint; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }

  /// Upper end of support; may be +inf for Gamma/Weibull.
  double support_upper() const { return upper_; }
  bool infinite_support() const { return !std::isfinite(upper_); }
  /// Finite working upper bound: min(u, quantile(1 - 1e-9)).
  double upper_trunc() const { return upper_trunc_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double survival(double x) const;
  double hazard(double x) const;
  double quantile(double p) const;

  double mean() const;

  double g_value(double x) const;
  double g_inverse(double target) const;
  double conditional_survival(double y, double x) const;

  Assumption1Report check_assumption1(int grid_size) const;
  bool increasing_hazard(int grid_size = 2000) const;

 private:
  IncomeDistribution(Kind k, double p1, double p2);
  void finalize();

  Kind kind_;
  double p1_ = 0.0, p2_ = 0.0;
  double upper_ = 1.0;
  double upper_trunc_ = 1.0;
  std::string name_;
  // empirical grid: piecewise-linear cdf
  std::vector<double> ex_, ecdf_;
};

namespace detail {
double reg_lower_gamma(double a, double x);
double reg_upper_gamma(double a, double x);
double reg_inc_beta(double a, double b, double x);
}  // namespace detail

}  // namespace lendopt

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lendopt/numerics.hpp"

namespace lendopt {

enum class ElasticityRegime { Decreasing, Constant, Increasing, Mixed };

std::string to_string(ElasticityRegime r);

struct ElasticityProfile {
  Eigen::ArrayXd d;
  Eigen::ArrayXd xi;
  ElasticityRegime regime = ElasticityRegime::Mixed;
};

/// Loan-acceptance probability s(d) as a function of the borrower discount
/// factor, with s(0)=0, s' > 0, s'' <= 0 on (0, rho]. Immutable.
class DemandFunction {
 public:
  /// s(d) = d^alpha. alpha = 1 (linear, weakly concave) is accepted since the
  /// long-run rate equation still has a unique root there.
  static DemandFunction constant_elasticity(double alpha);
  /// analytic derivative required; second derivative is central-differenced
  static DemandFunction from_callbacks(ScalarFn s, ScalarFn sprime,
                                       std::string label = "custom");
  /// s(d) = scale * d^alpha * exp(gamma d): elasticity alpha + gamma d, so
  /// gamma's sign selects the regime. Concavity requires
  /// gamma * d < sqrt(alpha) - alpha on the working range.
  static DemandFunction power_exp(double alpha, double gamma, double scale = 1.0);
  /// monotone cubic through (d, s) points
  static DemandFunction tabulated(std::vector<std::pair<double, double>> points);

  double s(double d) const;
  double sprime(double d) const;
  double sdoubleprime(double d) const;
  double elasticity(double d) const { return d * sprime(d) / s(d); }
  /// eta(d) = d + s(d)/s'(d); strictly increasing for valid demand
  double eta(double d) const { return d + s(d) / sprime(d); }

  bool is_constant_elasticity() const { return kind_ == Kind::ConstantElasticity; }
  double alpha() const;
  const std::string& name() const { return name_; }

  /// throws std::invalid_argument when shape conditions fail on a grid
  void validate(double rho, int grid_size = 200) const;

  ElasticityProfile classify_regime(double rho, int grid_size,
                                    double tol = 1e-9) const;

  /// Long-run discount factor: unique root of
  ///   (rho - d) s'(d) + rho s(d)^2 - s(d) = 0   on (0, rho),
  /// solved to |residual| <= 1e-12.
  double solve_d_star(double rho) const;

  /// (1 - s(d*) d*) / (1 - s(d*) rho), the per-unit value multiplier; > 1.
  double beta_factor(double rho, double d_star) const;

 private:
  enum class Kind { ConstantElasticity, Callbacks, Tabulated };
  DemandFunction() = default;
  Kind kind_ = Kind::Callbacks;
  double alpha_ = 0.0;
  ScalarFn s_, sp_;
  MonotoneCubic table_;
  std::vector<std::pair<double, double>> table_pts_;
  std::string name_;
};

/// Inverse of eta(d) = d + s/s' on (0, rho), via a monotone lookup table.
/// Built once per (demand, rho) pair; the two-control Bellman solver calls
/// this in its inner loop. operator() interpolates the table, which is enough
/// for value sweeps (the objective is flat to first order in d at the
/// optimum); refine() polishes with secant steps for policy extraction.
class EtaInverse {
 public:
  EtaInverse(const DemandFunction& demand, double rho, int table_size = 600);
  /// clamps to the bracket ends when the target lies outside the attained range
  double operator()(double target) const;
  double refine(double target) const;
  double d_min() const { return d_.front(); }
  double d_max() const { return d_.back(); }

 private:
  int cell(double target) const;
  const DemandFunction* demand_;
  std::vector<double> d_, eta_;
};

}  // namespace lendopt

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lendopt/distributions.hpp"

namespace lendopt {

/// Exogenous-rate market: lender discount factor rho, borrower discount
/// factor d = 1/(1+r). Lending is worthwhile only when rho > d.
struct ExoParams {
  double rho = 0.95;
  double d = 5.0 / 6.0;
  void validate() const;
};

/// Repayment level at which exploiting current information and probing for
/// more are indifferent: G(x) = (rho - d) / (rho (1 - d)).
double threshold_exo(const IncomeDistribution& dist, const ExoParams& params);

/// Uniform-income solution of the Bellman equation: linear control
/// y(x) = m x + n below the threshold, value x + (a x^2 + b x + c)/(1 - x).
struct UniformClosedForm {
  double rho = 0, d = 0;
  double a = 0, b = 0, c = 0, m = 0, n = 0, x_bar = 0;

  static UniformClosedForm solve(const ExoParams& params);

  double value(double x) const;
  double policy(double x) const;
  /// slope produced by the discarded quadratic root; exceeds 1
  double m_rejected() const;
};

/// Gridded fixed point of the Bellman operator with convergence metadata.
struct ExoValueFunction {
  Eigen::ArrayXd x;  // state grid on [0, upper_trunc]
  Eigen::ArrayXd j;  // values
  Eigen::ArrayXd y;  // policy (repayment amounts)
  int iterations = 0;
  double residual = 0.0;
  double x_bar = 0.0;
  std::vector<double> residual_history;

  double value_at(double q) const { return interp_linear(x, j, q); }
  double policy_at(double q) const { return interp_linear(x, y, q); }
};

/// Value iteration for the exogenous-rate Bellman recursion.
/// grid >= 200. Policy extraction scans grid nodes and refines with a
/// golden-section pass on the interpolated objective. Ties at the threshold
/// break toward y = x (stop experimenting).
ExoValueFunction value_iteration_exo(const IncomeDistribution& dist,
                                     const ExoParams& params, int grid,
                                     double tol, int max_iter = 100000,
                                     bool refine_band = true);

/// Replay a policy from x_start: y_t = policy(x_t), x_{t+1} = y_t.
std::vector<double> le_trajectory(const std::function<double(double)>& policy,
                                  double x_start, int horizon);

/// Convenience: closed form for uniform income, grid solve otherwise.
std::vector<double> le_trajectory_exo(const IncomeDistribution& dist,
                                      const ExoParams& params, double x_start,
                                      int horizon);

/// J(x) - sup_y { x - d y + rho S(y)/S(x) J(y) } for a candidate value
/// function; near zero when J solves the Bellman equation at x.
double exo_bellman_gap(const IncomeDistribution& dist, const ExoParams& params,
                       const std::function<double(double)>& value, double x,
                       double y_hi);

}  // namespace lendopt

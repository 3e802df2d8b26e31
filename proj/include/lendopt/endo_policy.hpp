#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lendopt/demand.hpp"
#include "lendopt/distributions.hpp"

namespace lendopt {

struct EndoParams {
  double rho = 0.95;
  DemandFunction demand;
  void validate() const;
};

/// Long-run quantities of the endogenous-rate model.
struct EndoCore {
  double d_star = 0.0;  // long-run discount factor
  double beta = 0.0;    // (1 - s(d*) d*) / (1 - s(d*) rho)
  double x_bar = 0.0;   // threshold: G(x_bar) = 1 - d*/(rho beta)
};

EndoCore solve_endo_core(const IncomeDistribution& dist, const EndoParams& params);

double threshold_endo(const IncomeDistribution& dist, const EndoParams& params);

/// Grand-experiment policy: test (y0, d0) once, then hold (y0, d*).
struct GePolicy {
  double y0 = 0.0;
  double d0 = 0.0;
  double x_bar = 0.0;
  double d_star = 0.0;
  double beta = 0.0;
};

/// Constant elasticity s(d) = d^alpha: y0 = x_bar,
/// d0 = S(x_bar)/S(x0) * d*. x0 is the pre-period lower-bound signal
/// (0 for the pure dynamic architecture).
GePolicy ge_constant_elasticity(const IncomeDistribution& dist,
                                const EndoParams& params, double x0 = 0.0);

/// Root function for the increasing-elasticity grand experiment:
///   M(d) = G^{-1}(1 - d/eta(d)) - F^{-1}(1 - S(x0) eta(d) / (rho beta));
/// M crosses zero exactly once on (0, d*).
ScalarFn ge_m_function(const IncomeDistribution& dist, const EndoParams& params,
                       double x0);

/// Increasing (or constant) elasticity with an increasing hazard rate:
/// solves M(d0) = 0, recovers y0 from both branches, requires agreement
/// within 1e-8.
GePolicy ge_increasing_elasticity(const IncomeDistribution& dist,
                                  const EndoParams& params, double x0);

/// Closed-form value function of the constant-elasticity model; carries the
/// distribution so the hybrid and analysis layers can evaluate it anywhere.
struct EndoConstModel {
  IncomeDistribution dist;
  double alpha = 0.0, rho = 0.0;
  double d_star = 0.0, x_bar = 0.0, beta = 0.0;
  double surv_xbar = 0.0;

  double discount_of_state(double x) const;  // S(x_bar)/S(x) * d*
  double value(double x) const;              // J(x)
  double npv(double x0) const { return value(x0) - x0; }
};

EndoConstModel make_endo_const_model(const IncomeDistribution& dist, double alpha,
                                     double rho);

/// One-shot objective from state x0 when the continuation follows the
/// grand-experiment value function: x0 - s(d) d y + rho s(d) S(y)/S(x0) J(y).
double ge_objective_const(const EndoConstModel& model, double y, double d,
                          double x0 = 0.0);

struct EndoValueFunction {
  Eigen::ArrayXd x, j, y, d;
  int iterations = 0;
  double residual = 0.0;
  double x_bar = 0.0, d_star = 0.0, beta = 0.0;
  std::vector<double> residual_history;

  double value_at(double q) const { return interp_linear(x, j, q); }
  double policy_at(double q) const { return interp_linear(x, y, q); }
  double discount_at(double q) const { return interp_linear(x, d, q); }
};

/// Two-control value iteration on the endogenous-rate Bellman recursion.
/// The inner discount-rate choice uses the first-order condition
/// eta(d) = rho S(y) J(y) / (S(x) y), inverted through a monotone table.
/// Accepts decreasing or constant elasticity; increasing/mixed regimes are
/// refused (the grand-experiment solvers cover increasing elasticity).
EndoValueFunction le_decreasing_elasticity(const IncomeDistribution& dist,
                                           const EndoParams& params, int grid,
                                           double tol, int max_iter = 100000);

}  // namespace lendopt

#pragma once

#include <functional>
#include <vector>

#include "lendopt/endo_policy.hpp"
#include "lendopt/exo_policy.hpp"

namespace lendopt {

/// Solved exogenous-rate model: value and policy callables plus the
/// threshold. Closed form for uniform income, grid solve otherwise.
struct ExoModel {
  ExoParams params;
  double x_bar = 0.0;
  std::function<double(double)> value;
  std::function<double(double)> policy;
  double npv_dynamic = 0.0;  // J(0)
};

ExoModel make_exo_model(const IncomeDistribution& dist, const ExoParams& params,
                        int grid = 2000, double tol = 1e-9);

enum class HybridBranch { Experiment, Constant };

struct HybridPolicyExo {
  double x0 = 0.0;
  double x_bar = 0.0;
  HybridBranch branch = HybridBranch::Experiment;
  std::vector<double> trajectory;  // repayment amounts (constant branch: single y)
  double npv = 0.0;
};

/// Signal-conditioned policy: below the threshold the lender runs the lean
/// sequence from the x0-truncated state; at or above it holds y = x0.
HybridPolicyExo hybrid_policy_exo(const ExoModel& model, double x0,
                                  int horizon = 200);

double hybrid_npv_exo(const ExoModel& model, double x0);

struct HybridPolicyEndo {
  double x0 = 0.0;
  double x_bar = 0.0;
  HybridBranch branch = HybridBranch::Experiment;
  double y0 = 0.0;
  double d0 = 0.0;
  double d_star = 0.0;
  double npv = 0.0;
};

HybridPolicyEndo hybrid_policy_endo_const(const EndoConstModel& model, double x0);

/// (E_{x0}[Pi_h] - Pi_d) / Pi_d with x0 distributed as income. The signal
/// expectation integrates by 64-node Gauss-Legendre, split at the threshold
/// where the hybrid value kinks.
double relative_advantage_exo(const IncomeDistribution& dist, const ExoModel& model);
double relative_advantage_endo(const EndoConstModel& model);

struct InclusivenessRow {
  double x0 = 0.0;
  double loan_dynamic = 0.0;
  double loan_hybrid = 0.0;
  double retention_dynamic = 0.0;
  double retention_hybrid = 0.0;
};

/// First-period loan amounts and retention probabilities under the dynamic
/// and hybrid architectures (constant elasticity). The hybrid column weakly
/// dominates row-wise; a violation throws.
std::vector<InclusivenessRow> inclusiveness_compare(const EndoConstModel& model,
                                                    const std::vector<double>& x0_grid);

}  // namespace lendopt

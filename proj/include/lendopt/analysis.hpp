#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lendopt/endo_policy.hpp"
#include "lendopt/exo_policy.hpp"

namespace lendopt {

/// Per-type NPV decomposition: a type-k borrower repays y_0..y_{k-1} and
/// defaults on the period-k loan. pv_interest[k] - pv_default[k] = npv[k].
struct NpvReport {
  std::vector<double> pv_interest;
  std::vector<double> pv_default;
  std::vector<double> npv;
  int k_star = -1;          // first type with nonnegative NPV
  double theta_star = 0.0;  // y_{k_star}
  double x_bar = 0.0;
  double npv_creditworthy = 0.0;  // discounted interest stream, never defaults
};

NpvReport npv_by_type(const std::vector<double>& trajectory, const ExoParams& params,
                      int k_max, double x_bar);

struct SegmentTable {
  double theta_star = 0.0;
  double x_bar = 0.0;
  double upper = 0.0;
  bool nonempty = false;       // all three segments have positive width
  bool monotone_tail = false;  // NPV nondecreasing from k_star on
};

SegmentTable segments(const NpvReport& report, double upper);

/// Dynamic grand-experiment NPV under constant elasticity:
///   (d*)^(alpha+1)/alpha * S(x_bar)^(alpha+1) * x_bar.
double expected_npv_ge(const IncomeDistribution& dist, double alpha, double rho);

struct VarianceSweepRow {
  double a = 0.0;         // symmetric Beta shape
  double variance = 0.0;  // 1 / (4 (2a + 1))
  double x_bar = 0.0;
  double e_npv = 0.0;
};

struct VarianceSweep {
  std::vector<VarianceSweepRow> rows;  // sorted by variance ascending
  double bernoulli_value = 0.0;        // exact two-atom endpoint (a -> 0)
  double degenerate_value = 0.0;       // point-mass endpoint (a -> inf)
  int transitions = 0;                 // sign changes of consecutive differences
  bool u_shaped = false;               // exactly one, decreasing -> increasing
  bool x_bar_u_shaped = false;
};

VarianceSweep variance_sweep_beta(double alpha, double rho,
                                  const std::vector<double>& a_grid, int jobs = 1);

/// Two-point income u +/- delta with mean u: policy A tests just above the
/// low atom at rate d0 = d*/2 then holds the high amount; policy B lends the
/// low amount safely at d*.
struct TwoPointRow {
  double delta = 0.0;
  double pi_a = 0.0;
  double pi_b = 0.0;
  char winner = 'B';
};

struct TwoPointTable {
  std::vector<TwoPointRow> rows;
  double crossing = 0.0;  // delta where the two linear profits intersect
  double d0 = 0.0;
  double d_star = 0.0;
  double beta = 0.0;
};

TwoPointTable two_point_example(double alpha, double rho, double u_mean,
                                const std::vector<double>& delta_grid);

/// Exponential family f(x|l) = h(x) exp(eta(l) T(x) - A(l)); the
/// normalization cancels inside G, so only h, T, eta are needed.
struct ExpFamily {
  ScalarFn h;
  ScalarFn T;
  ScalarFn eta;
  double support_lo = 0.0;
  double support_hi = 1.0;
};

struct CrossingReport {
  int crossing_count = 0;
  double x_star = 0.0;  // location when exactly one crossing
};

/// Sign changes of G(.|l1) - G(.|l2) on a grid that excludes 1e-6 margins.
CrossingReport single_crossing_check(const ExpFamily& family, double l1, double l2,
                                     int grid_size);

/// true iff the sequence is nonincreasing then nondecreasing
/// (every middle value is <= the max of its neighbors over all triples).
bool quasiconvexity_check(const std::vector<double>& values);

}  // namespace lendopt

#pragma once

#include <cstdint>
#include <vector>

#include "lendopt/demand.hpp"
#include "lendopt/distributions.hpp"
#include "lendopt/endo_policy.hpp"

namespace lendopt {

/// Counter-based uniform generator: every variate is a pure hash of
/// (seed, path, period, stream), so paths replay identically regardless of
/// evaluation order or thread count.
struct CounterRng {
  uint64_t seed = 0;
  double uniform(uint64_t path, uint64_t period, uint64_t stream) const;
};

/// Replayable lending schedule: y_t (and d_t when endogenous) per period,
/// constant after the listed prefix. Acceptance probabilities are baked in
/// so the path loop never evaluates the demand function.
struct SimPolicy {
  std::vector<double> y;
  double y_tail = 0.0;
  bool endogenous = false;
  std::vector<double> d;
  double d_tail = 0.0;
  std::vector<double> accept;  // s(d_t), endogenous only
  double accept_tail = 1.0;

  static SimPolicy exo(std::vector<double> trajectory, double y_limit, double d_rate);
  static SimPolicy endo_ge(const GePolicy& ge, const DemandFunction& demand);
  static SimPolicy endo_le(std::vector<double> y_seq, std::vector<double> d_seq,
                           double y_limit, double d_limit,
                           const DemandFunction& demand);

  double y_at(size_t t) const { return t < y.size() ? y[t] : y_tail; }
  double d_at(size_t t) const { return t < d.size() ? d[t] : d_tail; }
  double accept_at(size_t t) const {
    return t < accept.size() ? accept[t] : accept_tail;
  }
};

struct SimConfig {
  long long n_paths = 100000;
  uint64_t seed = 20240901;
  int horizon = 2000;
  bool antithetic = false;
  int jobs = 1;
  void validate() const;
};

struct SimResult {
  double mean_npv = 0.0;
  double std_error = 0.0;
  long long n_paths = 0;
  std::vector<long long> default_counts;  // by default period, capped histogram
  long long balk_count = 0;
  long long survive_count = 0;  // paths alive at the horizon cap
  double elapsed_seconds = 0.0;
};

/// Draw an income per path, replay the schedule, discount by rho^t. The
/// lender pays d_t y_t when the borrower accepts (probability s(d_t),
/// endogenous only) and collects y_t one period later iff income >= y_t.
SimResult simulate_cohort(const IncomeDistribution& dist, const SimPolicy& policy,
                          double rho, const SimConfig& config);

struct SegmentComparisonRow {
  int k = 0;
  double expected_mass = 0.0;  // F(y_k) - F(y_{k-1})
  double observed_freq = 0.0;
  double z = 0.0;
};

struct SegmentComparison {
  std::vector<SegmentComparisonRow> rows;
  double creditworthy_expected = 0.0;
  double creditworthy_observed = 0.0;
  double chi_square = 0.0;
  double chi_critical = 0.0;  // 1 - 1e-3 quantile at the row count dof
  bool pass = false;
};

/// Empirical default-period frequencies against the analytic interval masses.
SegmentComparison empirical_segments(const SimResult& result,
                                     const std::vector<double>& trajectory,
                                     const IncomeDistribution& dist, int k_max);

/// Wilson-Hilferty chi-square quantile approximation.
double chi_square_quantile(int dof, double p);

}  // namespace lendopt

#include "lendopt/mc_sim.hpp"

#include <cmath>

#include "test_util.hpp"
#include "lendopt/analysis.hpp"
#include "lendopt/endo_policy.hpp"
#include "lendopt/hybrid.hpp"

using namespace lendopt;

static const ExoParams kParams{0.95, 5.0 / 6.0};

static SimPolicy uniform_exo_policy(std::vector<double>* traj_out = nullptr) {
  auto cf = UniformClosedForm::solve(kParams);
  auto traj = le_trajectory([&](double x) { return cf.policy(x); }, 0.0, 120);
  if (traj_out) *traj_out = traj;
  return SimPolicy::exo(traj, cf.x_bar, kParams.d);
}

static void rng_behaves() {
  CounterRng rng{42};
  double u1 = rng.uniform(3, 5, 1);
  CHECK(u1 >= 0.0 && u1 < 1.0);
  CHECK(u1 == rng.uniform(3, 5, 1));           // pure function of the key
  CHECK(u1 != rng.uniform(4, 5, 1));           // any key change moves it
  CHECK(u1 != rng.uniform(3, 6, 1));
  CHECK(u1 != CounterRng{43}.uniform(3, 5, 1));
  // crude uniformity check over many draws
  double mean = 0.0;
  int n = 200000;
  for (int i = 0; i < n; ++i) mean += rng.uniform(i, 0, 9) / n;
  CHECK_CLOSE(mean, 0.5, 0.005);
}

static void exo_simulation_agrees() {
  auto dist = IncomeDistribution::uniform();
  auto cf = UniformClosedForm::solve(kParams);
  auto pol = uniform_exo_policy();
  SimConfig cfg;
  cfg.n_paths = 200000;
  cfg.seed = 1001;
  cfg.jobs = 4;
  auto res = simulate_cohort(dist, pol, kParams.rho, cfg);
  double z = (res.mean_npv - cf.value(0.0)) / res.std_error;
  CHECK(std::abs(z) <= 3.0);
  CHECK(res.balk_count == 0);  // no acceptance randomness with an exogenous rate
  CHECK(res.survive_count > 0);
}

static void endo_simulation_agrees() {
  auto dist = IncomeDistribution::uniform();
  auto demand = DemandFunction::constant_elasticity(1.0);
  EndoParams params{0.95, demand};
  auto ge = ge_constant_elasticity(dist, params);
  auto pol = SimPolicy::endo_ge(ge, demand);
  SimConfig cfg;
  cfg.n_paths = 400000;
  cfg.seed = 1002;
  cfg.jobs = 4;
  auto res = simulate_cohort(dist, pol, 0.95, cfg);
  double ref = expected_npv_ge(dist, 1.0, 0.95);
  CHECK(std::abs(res.mean_npv - ref) <= 3.0 * res.std_error);
  CHECK(res.balk_count > 0);  // acceptance is a coin flip each period
}

static void endo_le_simulation_agrees() {
  // two-control schedule replayed path by path against its own value function
  auto dist = IncomeDistribution::uniform();
  auto demand = DemandFunction::from_callbacks(
      [](double d) { return -std::expm1(-3.0 * d); },
      [](double d) { return 3.0 * std::exp(-3.0 * d); }, "1-exp(-3d)");
  EndoParams params{0.95, demand};
  auto vf = le_decreasing_elasticity(dist, params, 240, 1e-7);
  CHECK_CLOSE(vf.discount_at(0.8), vf.d_star, 1e-6);

  std::vector<double> ys, ds;
  double x = 0.0;
  for (int t = 0; t < 200; ++t) {
    double y = std::max(vf.policy_at(x), x);
    ys.push_back(y);
    ds.push_back(vf.discount_at(x));
    if (y - x < 1e-9 && t > 0) break;
    x = y;
  }
  auto pol = SimPolicy::endo_le(ys, ds, ys.back(), vf.discount_at(ys.back()), demand);
  SimConfig cfg;
  cfg.n_paths = 300000;
  cfg.seed = 909;
  cfg.jobs = 4;
  auto res = simulate_cohort(dist, pol, 0.95, cfg);
  CHECK(std::abs(res.mean_npv - vf.value_at(0.0)) <= 3.0 * res.std_error);
  CHECK(res.balk_count > 0);
}

static void deterministic_income_replay() {
  // point mass exactly at the tested amount: repayment never fails
  auto dist = IncomeDistribution::two_point(0.5, 0.0);
  auto demand = DemandFunction::constant_elasticity(1.0);
  double d_star = demand.solve_d_star(0.95);
  double beta = demand.beta_factor(0.95, d_star);
  GePolicy ge{0.5, d_star, 0.5, d_star, beta};
  auto pol = SimPolicy::endo_ge(ge, demand);
  SimConfig cfg;
  cfg.n_paths = 200000;
  cfg.seed = 1003;
  cfg.jobs = 2;
  auto res = simulate_cohort(dist, pol, 0.95, cfg);
  for (long long n : res.default_counts) CHECK(n == 0);
  // acceptance randomness only; the mean stays on the annuity value
  double ref = 0.5 * (beta - 1.0);
  CHECK(std::abs(res.mean_npv - ref) <= 3.0 * res.std_error);
}

static void seeded_replay_is_bit_identical() {
  auto dist = IncomeDistribution::uniform();
  auto pol = uniform_exo_policy();
  SimConfig cfg;
  cfg.n_paths = 60000;
  cfg.seed = 2024;
  cfg.jobs = 1;
  auto a = simulate_cohort(dist, pol, kParams.rho, cfg);
  cfg.jobs = 5;
  auto b = simulate_cohort(dist, pol, kParams.rho, cfg);
  CHECK(a.mean_npv == b.mean_npv);
  CHECK(a.std_error == b.std_error);
  CHECK(a.default_counts == b.default_counts);
  CHECK(a.survive_count == b.survive_count);

  cfg.seed = 2025;
  auto c = simulate_cohort(dist, pol, kParams.rho, cfg);
  CHECK(c.mean_npv != a.mean_npv);
}

static void antithetic_cuts_error() {
  auto dist = IncomeDistribution::uniform();
  auto pol = uniform_exo_policy();
  SimConfig cfg;
  cfg.n_paths = 200001;  // odd count gets rounded up to whole pairs
  cfg.seed = 31;
  cfg.jobs = 4;
  auto plain = simulate_cohort(dist, pol, kParams.rho, cfg);
  cfg.antithetic = true;
  auto anti = simulate_cohort(dist, pol, kParams.rho, cfg);
  CHECK(anti.n_paths % 2 == 0);
  CHECK(anti.std_error / plain.std_error < 0.9);
}

static void convergence_rate() {
  auto dist = IncomeDistribution::uniform();
  auto pol = uniform_exo_policy();
  std::vector<double> logn, logse;
  for (long long n : {1000LL, 10000LL, 100000LL}) {
    SimConfig cfg;
    cfg.n_paths = n;
    cfg.seed = 77;
    cfg.jobs = 4;
    auto r = simulate_cohort(dist, pol, kParams.rho, cfg);
    logn.push_back(std::log(static_cast<double>(n)));
    logse.push_back(std::log(r.std_error));
  }
  double sxx = 0, sxy = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < logn.size(); ++i) {
    sx += logn[i];
    sy += logse[i];
    sxx += logn[i] * logn[i];
    sxy += logn[i] * logse[i];
  }
  double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
  CHECK(std::abs(slope + 0.5) <= 0.1);
}

static void empirical_segment_masses() {
  auto dist = IncomeDistribution::uniform();
  std::vector<double> traj;
  auto pol = uniform_exo_policy(&traj);
  SimConfig cfg;
  cfg.n_paths = 400000;
  cfg.seed = 1313;
  cfg.jobs = 4;
  auto res = simulate_cohort(dist, pol, kParams.rho, cfg);
  auto cmp = empirical_segments(res, traj, dist, 10);

  // type-0 mass is F(y_0); the creditworthy mass is the survival at the bar
  CHECK_CLOSE(cmp.rows[0].expected_mass, dist.cdf(traj[0]), 1e-12);
  CHECK(std::abs(cmp.rows[0].z) <= 3.0);
  for (const auto& row : cmp.rows) CHECK(std::abs(row.z) <= 3.0);
  double n = static_cast<double>(res.n_paths);
  double se = std::sqrt(cmp.creditworthy_expected *
                        (1.0 - cmp.creditworthy_expected) / n);
  CHECK(std::abs(cmp.creditworthy_observed - cmp.creditworthy_expected) <= 3.0 * se);
  CHECK(cmp.pass);
  CHECK(cmp.chi_square < cmp.chi_critical);

  CHECK_THROWS(empirical_segments(res, traj, dist, 500), std::invalid_argument);
}

static void horizon_cap() {
  auto dist = IncomeDistribution::uniform();
  auto pol = uniform_exo_policy();
  SimConfig cfg;
  cfg.n_paths = 50000;
  cfg.seed = 11;
  cfg.jobs = 2;
  cfg.horizon = 5;  // truncates every surviving path early
  auto res = simulate_cohort(dist, pol, kParams.rho, cfg);
  CHECK(res.survive_count > 0);
  auto cf = UniformClosedForm::solve(kParams);
  CHECK(res.mean_npv < cf.value(0.0));  // the cut tail is all interest income
  long long total = res.balk_count + res.survive_count;
  for (long long n : res.default_counts) total += n;
  CHECK(total == res.n_paths);
}

static void config_validation() {
  SimConfig bad;
  bad.n_paths = 0;
  CHECK_THROWS(bad.validate(), std::invalid_argument);
  bad.n_paths = 10;
  bad.horizon = 0;
  CHECK_THROWS(bad.validate(), std::invalid_argument);
  CHECK_THROWS(SimPolicy::endo_le({0.1}, {}, 0.4, 0.7,
                                  DemandFunction::constant_elasticity(0.5)),
               std::invalid_argument);
}

int main() {
  rng_behaves();
  exo_simulation_agrees();
  endo_simulation_agrees();
  endo_le_simulation_agrees();
  deterministic_income_replay();
  seeded_replay_is_bit_identical();
  antithetic_cuts_error();
  convergence_rate();
  empirical_segment_masses();
  horizon_cap();
  config_validation();
  return testutil::summary("mc_sim");
}

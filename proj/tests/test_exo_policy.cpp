#include "lendopt/exo_policy.hpp"

#include <cmath>

#include "test_util.hpp"
#include "lendopt/mc_sim.hpp"

using namespace lendopt;

static const ExoParams kParams{0.95, 5.0 / 6.0};

static void threshold_examples() {
  auto uni = IncomeDistribution::uniform();
  double oracle = (kParams.rho - kParams.d) /
                  (2.0 * kParams.rho - kParams.d - kParams.d * kParams.rho);
  CHECK_CLOSE(threshold_exo(uni, kParams), oracle, 1e-10);

  // decreasing in the borrower discount factor
  double prev = 1.0;
  for (double d : {0.5, 0.6, 0.7, 0.8, 0.9}) {
    double xb = threshold_exo(uni, ExoParams{0.95, d});
    CHECK(xb < prev);
    prev = xb;
  }
  // no experimentation value as d approaches rho
  CHECK(threshold_exo(uni, ExoParams{0.95, 0.95 - 1e-6}) < 1e-4);

  CHECK_THROWS(threshold_exo(uni, ExoParams{0.8, 0.9}), std::invalid_argument);
}

static void indifference_margin() {
  // first-order gain of probing x + dx over exploiting x:
  //   (rho(1-d)/(1-rho)) (1 - (1-rho)d/((1-d)rho) - G(x)) dx,
  // positive below the threshold, zero at it, negative above
  auto dist = IncomeDistribution::uniform();
  double x_bar = threshold_exo(dist, kParams);
  double safe = kParams.rho * (1.0 - kParams.d) / (1.0 - kParams.rho);
  auto margin = [&](double x) {
    return safe *
           (1.0 - (1.0 - kParams.rho) * kParams.d /
                      ((1.0 - kParams.d) * kParams.rho) -
            dist.g_value(x));
  };
  CHECK_CLOSE(margin(x_bar), 0.0, 1e-9);
  CHECK(margin(x_bar - 0.1) > 0.0);
  CHECK(margin(x_bar + 0.1) < 0.0);

  // the same coefficient emerges from the two-strategy payoff gap
  double x = 0.3, dx = 1e-7;
  double exploit = -kParams.d * x + safe * x;
  double probe = -kParams.d * (x + dx) +
                 (1.0 - dist.hazard(x) * dx) * safe * (x + dx);
  CHECK_CLOSE((probe - exploit) / dx, margin(x), 1e-5);
}

static void closed_form_structure() {
  auto cf = UniformClosedForm::solve(kParams);
  CHECK_CLOSE(cf.x_bar, 0.42424242424242425, 1e-12);
  CHECK(cf.m > 0.0 && cf.m < 1.0);
  CHECK_CLOSE(cf.m, 0.5776, 2e-4);
  CHECK_CLOSE(cf.n, (1.0 - cf.m) * cf.x_bar, 1e-10);  // linear-control fixed point
  CHECK(cf.m_rejected() > 1.0);                       // the discarded branch

  // value matching and smooth pasting at the threshold
  CHECK_CLOSE(cf.value(cf.x_bar - 1e-9), cf.value(cf.x_bar + 1e-9), 1e-7);
  double safe_slope = (1.0 - kParams.d) / (1.0 - kParams.rho);
  CHECK_CLOSE((cf.value(cf.x_bar) - cf.value(cf.x_bar - 1e-6)) / 1e-6, safe_slope,
              1e-3);

  // the closed form solves the Bellman equation pointwise
  auto dist = IncomeDistribution::uniform();
  CounterRng rng{21};
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    double x = rng.uniform(k, 0, 0) * cf.x_bar * 0.999;
    double gap = exo_bellman_gap(dist, kParams, [&](double q) { return cf.value(q); },
                                 x, 0.9999);
    worst = std::max(worst, std::abs(gap));
  }
  CHECK(worst <= 1e-8);
}

static void value_iteration_matches() {
  auto dist = IncomeDistribution::uniform();
  auto cf = UniformClosedForm::solve(kParams);
  auto vf = value_iteration_exo(dist, kParams, 800, 1e-9);
  double sup = 0.0;
  for (int i = 0; i < vf.x.size(); ++i)
    sup = std::max(sup, std::abs(vf.j[i] - cf.value(vf.x[i])));
  CHECK(sup <= 1e-4);

  double cell = dist.upper_trunc() / 799.0;
  double safe = (1.0 - kParams.d) / (1.0 - kParams.rho);
  for (int i = 0; i < vf.x.size(); ++i) {
    CHECK(vf.y[i] >= vf.x[i]);                     // never lend below the known floor
    CHECK(vf.j[i] >= safe * vf.x[i] - 1e-9);       // at least the safe stream
    if (vf.x[i] >= vf.x_bar + cell) CHECK(vf.y[i] == vf.x[i]);
    if (vf.x[i] < vf.x_bar - cell) CHECK(vf.y[i] > vf.x[i]);
  }
  for (int i = 1; i < vf.x.size(); ++i) CHECK(vf.y[i] >= vf.y[i - 1] - 1e-9);

  // iterates contract after burn-in
  for (size_t k = 11; k < vf.residual_history.size(); ++k)
    CHECK(vf.residual_history[k] <= vf.residual_history[k - 1] * (1.0 + 1e-9));

  CHECK_THROWS(value_iteration_exo(dist, kParams, 100, 1e-9), std::invalid_argument);
  CHECK_THROWS(value_iteration_exo(dist, kParams, 300, -1.0), std::invalid_argument);
  CHECK_THROWS(value_iteration_exo(dist, kParams, 300, 1e-9, 3), std::runtime_error);
}

static void value_iteration_other_distributions() {
  // above the threshold the value is the safe stream for any income law
  auto b22 = IncomeDistribution::beta(2.0, 2.0);
  auto vf = value_iteration_exo(b22, kParams, 400, 1e-9);
  double safe = (1.0 - kParams.d) / (1.0 - kParams.rho);
  for (int i = 0; i < vf.x.size(); ++i) {
    if (vf.x[i] >= vf.x_bar)
      CHECK_CLOSE(vf.j[i], safe * vf.x[i], 1e-6 * std::max(1.0, safe * vf.x[i]));
  }

  // vanishing margin: threshold collapses and the value is the safe stream
  ExoParams tight{0.95, 0.95 - 1e-5};
  auto vft = value_iteration_exo(IncomeDistribution::uniform(), tight, 400, 1e-10);
  CHECK(vft.x_bar < 1e-3);
  double safe_t = (1.0 - tight.d) / (1.0 - tight.rho);
  for (int i = 0; i < vft.x.size(); i += 17)
    CHECK_CLOSE(vft.j[i], safe_t * vft.x[i], 1e-5);
}

static void plain_grid_and_gamma_income() {
  // no refinement band: plain uniform grid still matches the closed form
  auto dist = IncomeDistribution::uniform();
  auto cf = UniformClosedForm::solve(kParams);
  auto vf = value_iteration_exo(dist, kParams, 800, 1e-9, 100000, false);
  CHECK(static_cast<int>(vf.x.size()) == 800);
  double sup = 0.0;
  for (int i = 0; i < vf.x.size(); ++i)
    sup = std::max(sup, std::abs(vf.j[i] - cf.value(vf.x[i])));
  CHECK(sup <= 1e-4);

  // unbounded income: the solver works on the truncated domain
  auto gm = IncomeDistribution::gamma(2.0, 1.0);
  double xb = threshold_exo(gm, kParams);
  // G(x) = x^2/(1+x) for this shape/scale; invert the quadratic as an oracle
  double target = (kParams.rho - kParams.d) / (kParams.rho * (1.0 - kParams.d));
  double oracle = 0.5 * (target + std::sqrt(target * target + 4.0 * target));
  CHECK_CLOSE(xb, oracle, 1e-9);

  auto vg = value_iteration_exo(gm, kParams, 400, 1e-8);
  double safe = (1.0 - kParams.d) / (1.0 - kParams.rho);
  for (int i = 0; i < vg.x.size(); i += 23) {
    if (vg.x[i] >= vg.x_bar)
      CHECK_CLOSE(vg.j[i], safe * vg.x[i], 1e-5 * std::max(1.0, safe * vg.x[i]));
    CHECK(vg.j[i] >= safe * vg.x[i] - 1e-7);
  }
  auto traj = le_trajectory([&](double q) { return vg.policy_at(q); }, 0.0, 3000);
  CHECK(std::abs(traj.back() - vg.x_bar) <= 2.0 * gm.upper_trunc() / 399.0);
}

static void one_step_deviations() {
  auto dist = IncomeDistribution::uniform();
  auto vf = value_iteration_exo(dist, kParams, 600, 1e-9);
  CounterRng rng{22};
  for (int k = 0; k < 100; ++k) {
    double x = rng.uniform(k, 0, 0) * 0.9;
    double yopt = vf.policy_at(x);
    double yalt = x + rng.uniform(k, 1, 0) * (0.999 - x);
    auto obj = [&](double y) {
      return x - kParams.d * y +
             kParams.rho * dist.survival(y) / dist.survival(x) * vf.value_at(y);
    };
    CHECK(obj(yalt) <= obj(yopt) + 1e-6);
  }
}

static void trajectories() {
  auto cf = UniformClosedForm::solve(kParams);
  auto policy = [&](double x) { return cf.policy(x); };

  auto traj = le_trajectory(policy, 0.0, 60);
  CHECK_CLOSE(traj[0], cf.n, 1e-14);
  CHECK_CLOSE(traj[1], cf.m * cf.n + cf.n, 1e-14);
  // geometric approach: (x_bar - y_t) shrinks by the factor m each period;
  // the ratio loses precision once the gap nears rounding scale
  for (int t = 1; t < 40; ++t) CHECK(traj[t] > traj[t - 1]);
  for (int t = 1; t < 12; ++t)
    CHECK_CLOSE((cf.x_bar - traj[t]) / (cf.x_bar - traj[t - 1]), cf.m, 1e-8);

  auto flat = le_trajectory(policy, cf.x_bar + 0.1, 5);
  for (double y : flat) CHECK_CLOSE(y, cf.x_bar + 0.1, 0.0);

  CHECK(le_trajectory(policy, 0.2, 1).size() == 1);
  CHECK_THROWS(le_trajectory(policy, 0.0, 0), std::invalid_argument);

  // grid-policy trajectory reaches the threshold band
  auto dist = IncomeDistribution::uniform();
  auto vf = value_iteration_exo(dist, kParams, 500, 1e-9);
  auto gt = le_trajectory([&](double q) { return vf.policy_at(q); }, 0.0, 3000);
  CHECK(std::abs(gt.back() - vf.x_bar) <= 2.0 * dist.upper_trunc() / 499.0);

  auto conv = le_trajectory_exo(dist, kParams, 0.0, 30);
  CHECK_CLOSE(conv[0], cf.n, 1e-14);
}

int main() {
  threshold_examples();
  indifference_margin();
  closed_form_structure();
  value_iteration_matches();
  value_iteration_other_distributions();
  plain_grid_and_gamma_income();
  one_step_deviations();
  trajectories();
  return testutil::summary("exo_policy");
}

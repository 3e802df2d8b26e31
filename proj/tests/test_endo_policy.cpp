#include "lendopt/endo_policy.hpp"

#include <cmath>

#include "test_util.hpp"
#include "lendopt/exo_policy.hpp"
#include "lendopt/mc_sim.hpp"

using namespace lendopt;

static const double kRho = 0.95;

static DemandFunction saturating_demand(double k) {
  return DemandFunction::from_callbacks(
      [k](double d) { return -std::expm1(-k * d); },
      [k](double d) { return k * std::exp(-k * d); }, "1-exp(-kd)");
}

// elasticity 1/ln(3e/d): increasing with a zero limit at d = 0
static DemandFunction log_demand() {
  return DemandFunction::from_callbacks(
      [](double d) { return 1.0 / std::log(3.0 * M_E / d); },
      [](double d) {
        double L = std::log(3.0 * M_E / d);
        return 1.0 / (d * L * L);
      },
      "1/ln(3e/d)");
}

static void threshold_examples() {
  auto uni = IncomeDistribution::uniform();
  EndoParams p1{kRho, DemandFunction::constant_elasticity(1.0)};
  CHECK_CLOSE(threshold_endo(uni, p1), 1.0 / 3.0, 1e-10);

  EndoParams p05{kRho, DemandFunction::constant_elasticity(0.5)};
  CHECK_CLOSE(threshold_endo(uni, p05), 0.4, 1e-10);  // 1/(alpha + 2)

  // G(x_bar) rho beta + d* = rho beta for a non-power demand
  EndoParams pg{kRho, DemandFunction::power_exp(0.5, 0.1, 0.8)};
  EndoCore core = solve_endo_core(uni, pg);
  double lhs = uni.g_value(core.x_bar) * kRho * core.beta + core.d_star;
  CHECK_CLOSE(lhs, kRho * core.beta, 1e-10);
}

static void grand_experiment_constant() {
  auto uni = IncomeDistribution::uniform();
  EndoParams params{kRho, DemandFunction::constant_elasticity(1.0)};
  auto ge = ge_constant_elasticity(uni, params);
  double d_star = (1.0 - std::sqrt(1.0 - kRho * kRho)) / kRho;  // quadratic oracle
  CHECK_CLOSE(ge.y0, 1.0 / 3.0, 1e-10);
  CHECK_CLOSE(ge.d0, (2.0 / 3.0) * d_star, 1e-10);
  CHECK_CLOSE(ge.d_star, d_star, 1e-12);

  // signal at the threshold removes the survival discount entirely
  auto at_bar = ge_constant_elasticity(uni, params, ge.x_bar);
  CHECK_CLOSE(at_bar.d0, d_star, 1e-12);
  for (double x0 : {0.0, 0.1, 0.25, 0.5, 0.9}) {
    auto p = ge_constant_elasticity(uni, params, x0);
    CHECK(p.d0 <= p.d_star + 1e-15);
    CHECK(p.y0 >= p.x_bar - 1e-15 || x0 >= p.x_bar);
  }

  // perturbation never helps, from any conditioning state
  auto model = make_endo_const_model(uni, 1.0, kRho);
  for (double x0 : {0.0, 0.2}) {
    auto pol = ge_constant_elasticity(uni, params, x0);
    double base = ge_objective_const(model, pol.y0, pol.d0, x0);
    for (double e : {-1e-3, 1e-3}) {
      CHECK(ge_objective_const(model, pol.y0 + e, pol.d0, x0) <= base + 1e-12);
      CHECK(ge_objective_const(model, pol.y0, pol.d0 + e, x0) <= base + 1e-12);
    }
  }

  EndoParams wrong{kRho, saturating_demand(3.0)};
  CHECK_THROWS(ge_constant_elasticity(uni, wrong), std::invalid_argument);
}

static void grand_experiment_increasing() {
  auto uni = IncomeDistribution::uniform();
  auto demand = DemandFunction::power_exp(0.5, 0.12, 0.8);
  EndoParams params{kRho, demand};
  EndoCore core = solve_endo_core(uni, params);
  double x0 = 0.15;
  CHECK(x0 < core.x_bar);

  auto M = ge_m_function(uni, params, x0);
  CHECK_CLOSE(M(core.d_star), core.x_bar - x0, 1e-8);
  CHECK(M(core.d_star * 1e-5) < 0.0);

  auto ge = ge_increasing_elasticity(uni, params, x0);
  CHECK(ge.y0 >= core.x_bar);
  CHECK(ge.d0 < core.d_star);
  CHECK_CLOSE(M(ge.d0), 0.0, 1e-9);

  // the pair satisfies the joint first-order system directly
  double s_star = demand.s(core.d_star);
  double ratio_star = (1.0 - s_star * kRho) / (1.0 - s_star * core.d_star);
  double surv_ratio = uni.survival(x0) / uni.survival(ge.y0);
  double eq1 = uni.g_value(ge.y0) + surv_ratio * (ge.d0 / kRho) * ratio_star - 1.0;
  double eq2 = 1.0 / (surv_ratio * ratio_star) -
               (demand.s(ge.d0) + demand.sprime(ge.d0) * ge.d0) /
                   (kRho * demand.sprime(ge.d0));
  CHECK_CLOSE(eq1, 0.0, 1e-8);
  CHECK_CLOSE(eq2, 0.0, 1e-8);

  // constant elasticity collapses to the threshold experiment with the
  // survival-scaled rate
  EndoParams ce{kRho, DemandFunction::constant_elasticity(0.5)};
  auto collapsed = ge_increasing_elasticity(uni, ce, 0.2);
  EndoCore cc = solve_endo_core(uni, ce);
  CHECK_CLOSE(collapsed.y0, cc.x_bar, 1e-8);
  CHECK_CLOSE(collapsed.d0,
              uni.survival(cc.x_bar) / uni.survival(0.2) * cc.d_star, 1e-8);

  // regime and hazard preconditions
  EndoParams dec{kRho, saturating_demand(3.0)};
  CHECK_THROWS(ge_increasing_elasticity(uni, dec, 0.1), std::invalid_argument);
  auto dec_hazard = IncomeDistribution::weibull(0.7, 1.0);
  CHECK_THROWS(ge_increasing_elasticity(dec_hazard, params, 0.1),
               std::invalid_argument);
  CHECK_THROWS(ge_increasing_elasticity(uni, params, 0.9), std::invalid_argument);
}

static void m_function_zero_limit() {
  // with elasticity vanishing at d = 0 the root function approaches
  // G^{-1}(1) - u
  auto uni = IncomeDistribution::uniform();
  auto demand = log_demand();
  EndoParams params{kRho, demand};
  params.validate();
  auto M = ge_m_function(uni, params, 0.1);
  double y_hat = uni.g_inverse(1.0);
  CHECK_CLOSE(y_hat, 0.5, 1e-10);
  double limit = y_hat - uni.upper_trunc();
  double near = M(1e-10), far = M(1e-5);
  CHECK(near < 0.0 && far < 0.0);
  CHECK_CLOSE(near, limit, 0.05);
  CHECK(std::abs(near - limit) < std::abs(far - limit));  // approaches the limit
}

static void two_control_value_iteration() {
  auto uni = IncomeDistribution::uniform();
  EndoParams params{kRho, saturating_demand(3.0)};
  auto vf = le_decreasing_elasticity(uni, params, 240, 1e-7);
  double cell = uni.upper_trunc() / 239.0;

  for (int i = 0; i < vf.x.size(); ++i) {
    if (vf.x[i] >= vf.x_bar + 2.0 * cell) {
      CHECK_CLOSE(vf.j[i], vf.beta * vf.x[i], 1e-4);
      CHECK_CLOSE(vf.d[i], vf.d_star, 1e-6);
      CHECK(vf.y[i] == vf.x[i]);
    }
    if (vf.x[i] < vf.x_bar - 2.0 * cell) CHECK(vf.y[i] > vf.x[i]);
  }
  auto traj = le_trajectory([&](double q) { return vf.policy_at(q); }, 0.0, 3000);
  for (size_t s = 1; s < traj.size(); ++s) CHECK(traj[s] >= traj[s - 1] - 1e-12);
  CHECK(std::abs(traj.back() - vf.x_bar) <= 2.0 * cell);

  // constant elasticity run as a cross-check recovers the grand experiment
  EndoParams ce{kRho, DemandFunction::constant_elasticity(1.0)};
  auto model = make_endo_const_model(uni, 1.0, kRho);
  auto vfc = le_decreasing_elasticity(uni, ce, 240, 1e-7);
  double cellc = uni.upper_trunc() / 239.0;
  double sup = 0.0;
  for (int i = 0; i < vfc.x.size(); ++i)
    sup = std::max(sup, std::abs(vfc.j[i] - model.value(vfc.x[i])));
  CHECK(sup <= 1e-4);
  for (int i = 0; i < vfc.x.size(); ++i) {
    if (vfc.x[i] < vfc.x_bar - 2.0 * cellc)
      CHECK(std::abs(vfc.y[i] - vfc.x_bar) <= 2.0 * cellc);  // jumps to the target
  }

  EndoParams inc{kRho, DemandFunction::power_exp(0.5, 0.12, 0.8)};
  CHECK_THROWS(le_decreasing_elasticity(uni, inc, 240, 1e-7), std::invalid_argument);
  CHECK_THROWS(le_decreasing_elasticity(uni, params, 100, 1e-7),
               std::invalid_argument);
}

static void const_model_values() {
  auto uni = IncomeDistribution::uniform();
  auto model = make_endo_const_model(uni, 1.0, kRho);
  // above the threshold the value is the safe multiplier
  CHECK_CLOSE(model.value(0.5), model.beta * 0.5, 1e-14);
  // continuity at the threshold
  CHECK_CLOSE(model.value(model.x_bar - 1e-10), model.value(model.x_bar + 1e-10),
              1e-8);
  // the state-dependent rate interpolates between d0 and d*
  CHECK_CLOSE(model.discount_of_state(0.0), 2.0 / 3.0 * model.d_star, 1e-12);
  CHECK_CLOSE(model.discount_of_state(model.x_bar), model.d_star, 1e-12);
}

int main() {
  threshold_examples();
  grand_experiment_constant();
  grand_experiment_increasing();
  m_function_zero_limit();
  two_control_value_iteration();
  const_model_values();
  return testutil::summary("endo_policy");
}

#include "lendopt/hybrid.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace lendopt {

ExoModel make_exo_model(const IncomeDistribution& dist, const ExoParams& params,
                        int grid, double tol) {
  ExoModel m;
  m.params = params;
  if (dist.kind() == IncomeDistribution::Kind::Uniform) {
    auto cf = UniformClosedForm::solve(params);
    m.x_bar = cf.x_bar;
    m.value = [cf](double x) { return cf.value(x); };
    m.policy = [cf](double x) { return cf.policy(x); };
  } else {
    auto vf = std::make_shared<ExoValueFunction>(
        value_iteration_exo(dist, params, grid, tol));
    m.x_bar = vf->x_bar;
    m.value = [vf](double x) { return vf->value_at(x); };
    m.policy = [vf](double x) { return vf->policy_at(x); };
  }
  m.npv_dynamic = m.value(0.0);
  return m;
}

double hybrid_npv_exo(const ExoModel& model, double x0) {
  const double rho = model.params.rho, d = model.params.d;
  if (x0 >= model.x_bar) return (rho - d) / (1.0 - rho) * x0;
  return model.value(x0) - x0;
}

HybridPolicyExo hybrid_policy_exo(const ExoModel& model, double x0, int horizon) {
  HybridPolicyExo h;
  h.x0 = x0;
  h.x_bar = model.x_bar;
  h.npv = hybrid_npv_exo(model, x0);
  if (x0 >= model.x_bar) {
    h.branch = HybridBranch::Constant;
    h.trajectory = {x0};
  } else {
    h.branch = HybridBranch::Experiment;
    h.trajectory = le_trajectory(model.policy, x0, horizon);
  }
  return h;
}

HybridPolicyEndo hybrid_policy_endo_const(const EndoConstModel& model, double x0) {
  HybridPolicyEndo h;
  h.x0 = x0;
  h.x_bar = model.x_bar;
  h.d_star = model.d_star;
  h.npv = model.npv(x0);
  if (x0 >= model.x_bar) {
    h.branch = HybridBranch::Constant;
    h.y0 = x0;
    h.d0 = model.d_star;
  } else {
    h.branch = HybridBranch::Experiment;
    h.y0 = model.x_bar;
    h.d0 = model.discount_of_state(x0);
  }
  return h;
}

namespace {

double signal_expectation(const IncomeDistribution& dist, double x_bar,
                          const std::function<double(double)>& npv) {
  auto integrand = [&](double x) { return npv(x) * dist.pdf(x); };
  double hi = dist.upper_trunc();
  double below = integrate_gl(integrand, 0.0, std::min(x_bar, hi), 64);
  double above = x_bar < hi ? integrate_gl(integrand, x_bar, hi, 64) : 0.0;
  return below + above;
}

}  // namespace

double relative_advantage_exo(const IncomeDistribution& dist, const ExoModel& model) {
  double e_hybrid = signal_expectation(
      dist, model.x_bar, [&](double x) { return hybrid_npv_exo(model, x); });
  return (e_hybrid - model.npv_dynamic) / model.npv_dynamic;
}

double relative_advantage_endo(const EndoConstModel& model) {
  double pi_d = model.npv(0.0);
  double e_hybrid = signal_expectation(model.dist, model.x_bar,
                                       [&](double x) { return model.npv(x); });
  return (e_hybrid - pi_d) / pi_d;
}

std::vector<InclusivenessRow> inclusiveness_compare(const EndoConstModel& model,
                                                    const std::vector<double>& x0_grid) {
  auto s = [&](double d) { return std::pow(d, model.alpha); };
  const double sx = model.surv_xbar;
  const double ds = model.d_star;
  const double xb = model.x_bar;
  std::vector<InclusivenessRow> rows;
  rows.reserve(x0_grid.size());
  for (double x0 : x0_grid) {
    InclusivenessRow r;
    r.x0 = x0;
    r.loan_dynamic = sx * ds * xb;
    if (x0 < xb) {
      double ratio = sx / model.dist.survival(x0);
      r.loan_hybrid = ratio * ds * xb;
      r.retention_dynamic = s(sx * ds) * ratio;
      r.retention_hybrid = s(ratio * ds) * ratio;
    } else {
      r.loan_hybrid = ds * x0;
      r.retention_dynamic = s(sx * ds);
      r.retention_hybrid = s(ds);
    }
    if (r.loan_hybrid < r.loan_dynamic - 1e-12 ||
        r.retention_hybrid < r.retention_dynamic - 1e-12)
      throw std::runtime_error("inclusiveness_compare: hybrid fails to dominate");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lendopt

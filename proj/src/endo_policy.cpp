#include "lendopt/endo_policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lendopt {

void EndoParams::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("EndoParams: rho in (0,1)");
  demand.validate(rho);
}

EndoCore solve_endo_core(const IncomeDistribution& dist, const EndoParams& params) {
  params.validate();
  EndoCore core;
  core.d_star = params.demand.solve_d_star(params.rho);
  core.beta = params.demand.beta_factor(params.rho, core.d_star);
  double target = 1.0 - core.d_star / (params.rho * core.beta);
  core.x_bar = dist.g_inverse(target);
  return core;
}

double threshold_endo(const IncomeDistribution& dist, const EndoParams& params) {
  return solve_endo_core(dist, params).x_bar;
}

GePolicy ge_constant_elasticity(const IncomeDistribution& dist,
                                const EndoParams& params, double x0) {
  if (!params.demand.is_constant_elasticity())
    throw std::invalid_argument("ge_constant_elasticity: demand regime is not constant");
  EndoCore core = solve_endo_core(dist, params);
  GePolicy p;
  p.x_bar = core.x_bar;
  p.d_star = core.d_star;
  p.beta = core.beta;
  if (x0 >= core.x_bar) {
    p.y0 = x0;
    p.d0 = core.d_star;
  } else {
    p.y0 = core.x_bar;
    p.d0 = dist.survival(core.x_bar) / dist.survival(x0) * core.d_star;
  }
  return p;
}

ScalarFn ge_m_function(const IncomeDistribution& dist, const EndoParams& params,
                       double x0) {
  EndoCore core = solve_endo_core(dist, params);
  double rho_beta = params.rho * core.beta;
  double s0 = dist.survival(x0);
  DemandFunction demand = params.demand;
  IncomeDistribution income = dist;
  return [demand, income, rho_beta, s0](double dd) {
    double eta = demand.eta(dd);
    double branch_g = income.g_inverse(1.0 - dd / eta);
    double p = 1.0 - s0 * eta / rho_beta;
    p = std::clamp(p, 0.0, 1.0 - 1e-12);
    double branch_f = income.quantile(p);
    return branch_g - branch_f;
  };
}

GePolicy ge_increasing_elasticity(const IncomeDistribution& dist,
                                  const EndoParams& params, double x0) {
  auto profile = params.demand.classify_regime(params.rho, 400);
  if (profile.regime != ElasticityRegime::Increasing &&
      profile.regime != ElasticityRegime::Constant)
    throw std::invalid_argument(
        "ge_increasing_elasticity: demand elasticity must be increasing or constant");
  if (!dist.increasing_hazard())
    throw std::invalid_argument("ge_increasing_elasticity: hazard rate must be increasing");
  EndoCore core = solve_endo_core(dist, params);
  if (!(x0 < core.x_bar))
    throw std::invalid_argument("ge_increasing_elasticity: need x0 < threshold");

  auto M = ge_m_function(dist, params, x0);
  double hi = core.d_star;
  double lo = core.d_star * 1e-6;
  double flo = M(lo);
  while (flo > 0.0 && lo > 1e-12) {
    lo *= 0.1;
    flo = M(lo);
  }
  if (flo > 0.0) throw std::runtime_error("ge_increasing_elasticity: no bracket for d0");
  double d0 = find_root(M, lo, hi, 1e-12);

  double eta = params.demand.eta(d0);
  double y_from_g = dist.g_inverse(1.0 - d0 / eta);
  double p = std::clamp(1.0 - dist.survival(x0) * eta / (params.rho * core.beta), 0.0,
                        1.0 - 1e-12);
  double y_from_f = dist.quantile(p);
  if (std::abs(y_from_g - y_from_f) > 1e-8)
    throw std::runtime_error("ge_increasing_elasticity: branch values disagree");

  GePolicy pol;
  pol.y0 = 0.5 * (y_from_g + y_from_f);
  pol.d0 = d0;
  pol.x_bar = core.x_bar;
  pol.d_star = core.d_star;
  pol.beta = core.beta;
  return pol;
}

double EndoConstModel::discount_of_state(double x) const {
  return surv_xbar / dist.survival(x) * d_star;
}

double EndoConstModel::value(double x) const {
  if (x >= x_bar) return beta * x;
  double dx = discount_of_state(x);
  double sx = dist.survival(x);
  return x - std::pow(dx, alpha + 1.0) * x_bar +
         rho * std::pow(dx, alpha) * (surv_xbar / sx) * beta * x_bar;
}

EndoConstModel make_endo_const_model(const IncomeDistribution& dist, double alpha,
                                     double rho) {
  EndoParams params{rho, DemandFunction::constant_elasticity(alpha)};
  EndoCore core = solve_endo_core(dist, params);
  EndoConstModel m{dist, alpha, rho, core.d_star, core.x_bar, core.beta,
                   dist.survival(core.x_bar)};
  return m;
}

double ge_objective_const(const EndoConstModel& model, double y, double d, double x0) {
  double s = std::pow(d, model.alpha);
  double ratio = model.dist.survival(y) / model.dist.survival(x0);
  return x0 - s * d * y + model.rho * s * ratio * model.value(y);
}

EndoValueFunction le_decreasing_elasticity(const IncomeDistribution& dist,
                                           const EndoParams& params, int grid,
                                           double tol, int max_iter) {
  params.validate();
  if (grid < 200) throw std::invalid_argument("le_decreasing_elasticity: grid >= 200");
  auto profile = params.demand.classify_regime(params.rho, 400);
  if (profile.regime == ElasticityRegime::Increasing ||
      profile.regime == ElasticityRegime::Mixed)
    throw std::invalid_argument(
        "le_decreasing_elasticity: demand elasticity must be decreasing or constant");

  const double rho = params.rho;
  const DemandFunction& demand = params.demand;
  EndoCore core = solve_endo_core(dist, params);
  EtaInverse eta_inv(demand, rho);

  EndoValueFunction vf;
  vf.x_bar = core.x_bar;
  vf.d_star = core.d_star;
  vf.beta = core.beta;
  vf.x = state_grid(dist.upper_trunc(), grid, core.x_bar, true);
  const int n = static_cast<int>(vf.x.size());

  Eigen::ArrayXd surv(n);
  for (int i = 0; i < n; ++i) surv[i] = dist.survival(vf.x[i]);

  vf.j = core.beta * vf.x;  // value of holding (x, d*) forever; feasible
  vf.y = vf.x;
  vf.d = Eigen::ArrayXd::Constant(n, core.d_star);
  Eigen::ArrayXd jnext(n), w(n);

  // given continuation weight wq = S(y) J(y), best rate and payoff at (x_i, y);
  // the interpolated inverse is enough for value sweeps since the objective
  // is flat to first order in d at the optimum, extraction polishes
  auto eval = [&](double xi, double si, double yq, double wq, double& d_out,
                  bool polish) {
    double dd;
    if (yq < 1e-14) {
      dd = eta_inv.d_max();
    } else {
      double target = rho * wq / (si * yq);
      dd = polish ? eta_inv.refine(target) : eta_inv(target);
    }
    d_out = dd;
    double s = demand.s(dd);
    return xi - s * dd * yq + rho * s * wq / si;
  };

  auto sweep = [&](bool extract) {
    w = surv * vf.j;
    for (int i = 0; i < n; ++i) {
      const double xi = vf.x[i];
      const double si = surv[i];
      double dtmp;
      int best_k = i;
      double best_d;
      double best_f = eval(xi, si, vf.x[i], w[i], best_d, extract);
      for (int k = i + 1; k < n; ++k) {
        double f = eval(xi, si, vf.x[k], w[k], dtmp, extract);
        if (f > best_f) {
          best_f = f;
          best_k = k;
          best_d = dtmp;
        }
      }
      double lo = vf.x[std::max(i, best_k - 1)];
      double hi = vf.x[std::min(n - 1, best_k + 1)];
      double ystar = vf.x[best_k];
      double fstar = best_f;
      if (hi > lo) {
        auto obj = [&](double yq) {
          double dout;
          return eval(xi, si, yq, interp_linear(vf.x, w, yq), dout, extract);
        };
        double yg = golden_max(obj, lo, hi, 1e-10);
        double fg = obj(yg);
        if (fg > fstar) {
          fstar = fg;
          ystar = yg;
          eval(xi, si, yg, interp_linear(vf.x, w, yg), best_d, extract);
        }
      }
      double dstay;
      double f_stay = eval(xi, si, xi, w[i], dstay, extract);
      if (fstar - f_stay < 1e-12) {
        ystar = xi;
        best_d = dstay;
        fstar = std::max(fstar, f_stay);
      }
      jnext[i] = fstar;
      if (extract) {
        vf.y[i] = ystar;
        vf.d[i] = best_d;
      }
    }
  };

  double res = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iter; ++it) {
    sweep(false);
    res = (jnext - vf.j).abs().maxCoeff();
    vf.j = jnext;
    vf.residual_history.push_back(res);
    if (res <= tol) break;
  }
  if (res > tol)
    throw std::runtime_error("le_decreasing_elasticity: no convergence within cap");
  sweep(true);
  vf.j = jnext;
  vf.iterations = it + 1;
  vf.residual = res;
  return vf;
}

}  // namespace lendopt

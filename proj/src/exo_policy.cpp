#include "lendopt/exo_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lendopt {

void ExoParams::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("ExoParams: rho in (0,1)");
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("ExoParams: d in (0,1)");
  if (!(rho > d)) throw std::invalid_argument("ExoParams: need rho > d");
}

double threshold_exo(const IncomeDistribution& dist, const ExoParams& params) {
  params.validate();
  double target = (params.rho - params.d) / (params.rho * (1.0 - params.d));
  return dist.g_inverse(target);
}

UniformClosedForm UniformClosedForm::solve(const ExoParams& params) {
  params.validate();
  double rho = params.rho, d = params.d;
  UniformClosedForm cf;
  cf.rho = rho;
  cf.d = d;
  cf.x_bar = (rho - d) / (2.0 * rho - d - d * rho);
  double root = d * std::sqrt((rho - d * d) / (rho * d * d));
  cf.a = 0.5 * (1.0 - root);
  cf.b = (rho - d) * (root + d - 1.0) / (2.0 * rho - rho * d - d);
  cf.c = (rho - d) * (rho - d) *
         (1.0 - 2.0 * d + rho - (1.0 - rho) * std::sqrt(1.0 - d * d / rho)) /
         (2.0 * (1.0 - rho) * std::pow(2.0 * rho - d - rho * d, 2));
  cf.m = d / (2.0 * rho * (1.0 - cf.a));
  cf.n = (rho - d + cf.b * rho) / (2.0 * rho * (1.0 - cf.a));
  return cf;
}

double UniformClosedForm::value(double x) const {
  if (x >= x_bar) return (1.0 - d) / (1.0 - rho) * x;
  return x + (a * x * x + b * x + c) / (1.0 - x);
}

double UniformClosedForm::policy(double x) const {
  if (x >= x_bar) return x;
  return m * x + n;
}

double UniformClosedForm::m_rejected() const {
  double root = d * std::sqrt((rho - d * d) / (rho * d * d));
  double a1 = 0.5 * (1.0 + root);
  return d / (2.0 * rho * (1.0 - a1));
}

ExoValueFunction value_iteration_exo(const IncomeDistribution& dist,
                                     const ExoParams& params, int grid, double tol,
                                     int max_iter, bool refine_band) {
  params.validate();
  if (grid < 200) throw std::invalid_argument("value_iteration_exo: grid >= 200");
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration_exo: tol > 0");
  const double rho = params.rho, d = params.d;

  ExoValueFunction vf;
  vf.x_bar = threshold_exo(dist, params);
  vf.x = state_grid(dist.upper_trunc(), grid, vf.x_bar, refine_band);
  const int n = static_cast<int>(vf.x.size());

  Eigen::ArrayXd surv(n);
  for (int i = 0; i < n; ++i) surv[i] = dist.survival(vf.x[i]);

  // start from the value of the safe policy y = x forever; a feasible policy,
  // so iterates increase monotonically toward the fixed point
  vf.j = (1.0 - d) / (1.0 - rho) * vf.x;
  Eigen::ArrayXd jnext(n), w(n);
  vf.y = vf.x;

  auto sweep = [&](bool extract_policy) {
    w = surv * vf.j;  // discounted-continuation numerator at grid nodes
    for (int i = 0; i < n; ++i) {
      const double xi = vf.x[i];
      const double si = surv[i];
      int best_k = i;
      double best_f = xi - d * vf.x[i] + rho * w[i] / si;
      for (int k = i + 1; k < n; ++k) {
        double f = xi - d * vf.x[k] + rho * w[k] / si;
        if (f > best_f) {
          best_f = f;
          best_k = k;
        }
      }
      // golden refinement of the interpolated objective around the best node
      double lo = vf.x[std::max(i, best_k - 1)];
      double hi = vf.x[std::min(n - 1, best_k + 1)];
      double ystar = vf.x[best_k];
      double fstar = best_f;
      if (hi > lo) {
        auto obj = [&](double yq) {
          return xi - d * yq + rho * interp_linear(vf.x, w, yq) / si;
        };
        double yg = golden_max(obj, lo, hi, 1e-10);
        double fg = obj(yg);
        if (fg > fstar) {
          fstar = fg;
          ystar = yg;
        }
      }
      double f_stay = xi - d * xi + rho * w[i] / si;
      if (fstar - f_stay < 1e-12) {  // stop experimenting on ties
        ystar = xi;
        fstar = std::max(fstar, f_stay);
      }
      jnext[i] = fstar;
      if (extract_policy) vf.y[i] = ystar;
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
    throw std::runtime_error("value_iteration_exo: no convergence within iteration cap");
  sweep(true);
  vf.j = jnext;
  vf.iterations = it + 1;
  vf.residual = res;
  return vf;
}

std::vector<double> le_trajectory(const std::function<double(double)>& policy,
                                  double x_start, int horizon) {
  if (horizon < 1) throw std::invalid_argument("le_trajectory: horizon >= 1");
  std::vector<double> ys;
  ys.reserve(horizon);
  double x = x_start;
  for (int t = 0; t < horizon; ++t) {
    double y = std::max(policy(x), x);
    ys.push_back(y);
    x = y;
  }
  return ys;
}

std::vector<double> le_trajectory_exo(const IncomeDistribution& dist,
                                      const ExoParams& params, double x_start,
                                      int horizon) {
  if (dist.kind() == IncomeDistribution::Kind::Uniform) {
    auto cf = UniformClosedForm::solve(params);
    return le_trajectory([&](double x) { return cf.policy(x); }, x_start, horizon);
  }
  auto vf = value_iteration_exo(dist, params, 2000, 1e-9);
  return le_trajectory([&](double x) { return vf.policy_at(x); }, x_start, horizon);
}

double exo_bellman_gap(const IncomeDistribution& dist, const ExoParams& params,
                       const std::function<double(double)>& value, double x,
                       double y_hi) {
  double sx = dist.survival(x);
  auto obj = [&](double y) {
    return x - params.d * y + params.rho * dist.survival(y) / sx * value(y);
  };
  double ystar = golden_max(obj, x, y_hi, 1e-11);
  double best = std::max(obj(ystar), obj(x));
  return value(x) - best;
}

}  // namespace lendopt

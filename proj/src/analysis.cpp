#include "lendopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lendopt {

NpvReport npv_by_type(const std::vector<double>& trajectory, const ExoParams& params,
                      int k_max, double x_bar) {
  params.validate();
  if (trajectory.empty()) throw std::invalid_argument("npv_by_type: empty trajectory");
  if (k_max + 1 > static_cast<int>(trajectory.size()))
    throw std::invalid_argument("npv_by_type: trajectory shorter than k_max + 1");
  const double rho = params.rho, d = params.d;

  NpvReport rep;
  rep.x_bar = x_bar;
  rep.pv_interest.resize(k_max + 1);
  rep.pv_default.resize(k_max + 1);
  rep.npv.resize(k_max + 1);

  double disc = 1.0;  // rho^k
  KahanAccumulator interest;
  for (int k = 0; k <= k_max; ++k) {
    rep.pv_interest[k] = interest.value();
    rep.pv_default[k] = disc * d * trajectory[k];
    rep.npv[k] = rep.pv_interest[k] - rep.pv_default[k];
    if (rep.k_star < 0 && rep.npv[k] >= 0.0) {
      rep.k_star = k;
      rep.theta_star = trajectory[k];
    }
    interest.add(disc * (rho - d) * trajectory[k]);
    disc *= rho;
  }

  // full interest stream: explicit sum while the amounts still move, then the
  // geometric tail at the stabilized amount (the limit x_bar for lean
  // sequences, the constant amount otherwise)
  KahanAccumulator full;
  disc = 1.0;
  size_t t = 0;
  double tail_amount = trajectory.back();
  for (; t < trajectory.size(); ++t) {
    if (t + 1 < trajectory.size() &&
        std::abs(trajectory[t + 1] - trajectory[t]) < 1e-10 && t > 0) {
      tail_amount = trajectory[t];
      break;
    }
    full.add(disc * (rho - d) * trajectory[t]);
    disc *= rho;
  }
  full.add(disc * (rho - d) * tail_amount / (1.0 - rho));
  rep.npv_creditworthy = full.value();
  return rep;
}

SegmentTable segments(const NpvReport& report, double upper) {
  if (report.k_star < 0)
    throw std::invalid_argument("segments: no profitable type found in the report");
  SegmentTable t;
  t.theta_star = report.theta_star;
  t.x_bar = report.x_bar;
  t.upper = upper;
  t.nonempty = report.theta_star > 0.0 && report.theta_star < report.x_bar &&
               report.x_bar < upper;
  t.monotone_tail = true;
  for (size_t k = report.k_star; k + 1 < report.npv.size(); ++k) {
    if (report.npv[k + 1] < report.npv[k] - 1e-12) t.monotone_tail = false;
  }
  return t;
}

double expected_npv_ge(const IncomeDistribution& dist, double alpha, double rho) {
  EndoParams params{rho, DemandFunction::constant_elasticity(alpha)};
  EndoCore core = solve_endo_core(dist, params);
  double sbar = dist.survival(core.x_bar);
  return std::pow(core.d_star, alpha + 1.0) / alpha * std::pow(sbar, alpha + 1.0) *
         core.x_bar;
}

namespace {

// sign-change census of consecutive differences; returns {transitions, first
// nonzero sign, last nonzero sign}
struct DiffPattern {
  int transitions = 0;
  int first_sign = 0;
  int last_sign = 0;
};

DiffPattern diff_pattern(const std::vector<double>& v, double tol) {
  DiffPattern p;
  int prev = 0;
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    double diff = v[i + 1] - v[i];
    if (std::abs(diff) <= tol) continue;
    int s = diff > 0 ? 1 : -1;
    if (p.first_sign == 0) p.first_sign = s;
    if (prev != 0 && s != prev) ++p.transitions;
    prev = s;
  }
  p.last_sign = prev;
  return p;
}

}  // namespace

VarianceSweep variance_sweep_beta(double alpha, double rho,
                                  const std::vector<double>& a_grid, int jobs) {
  auto demand = DemandFunction::constant_elasticity(alpha);
  double d_star = demand.solve_d_star(rho);
  double g_target = 1.0 / (alpha + 1.0);

  VarianceSweep sweep;
  sweep.rows.resize(a_grid.size());
  std::vector<double> sorted_a = a_grid;
  std::sort(sorted_a.begin(), sorted_a.end());

  parallel_for(static_cast<int>(sorted_a.size()), jobs, [&](int i) {
    double a = sorted_a[i];
    auto dist = IncomeDistribution::beta(a, a);
    VarianceSweepRow row;
    row.a = a;
    row.variance = 1.0 / (4.0 * (2.0 * a + 1.0));
    row.x_bar = dist.g_inverse(g_target);
    row.e_npv = std::pow(d_star, alpha + 1.0) / alpha *
                std::pow(dist.survival(row.x_bar), alpha + 1.0) * row.x_bar;
    sweep.rows[i] = row;
  });

  // endpoints with atom-exact survival: two equal atoms, then a point mass
  auto bern = IncomeDistribution::two_point(0.5, 0.5);
  sweep.bernoulli_value = std::pow(d_star, alpha + 1.0) / alpha *
                          std::pow(bern.survival(1.0), alpha + 1.0) * 1.0;
  auto degen = IncomeDistribution::two_point(0.5, 0.0);
  sweep.degenerate_value = std::pow(d_star, alpha + 1.0) / alpha *
                           std::pow(degen.survival(0.5), alpha + 1.0) * 0.5;

  std::vector<double> xbar_by_a;
  xbar_by_a.reserve(sweep.rows.size());
  for (const auto& r : sweep.rows) xbar_by_a.push_back(r.x_bar);
  auto xp = diff_pattern(xbar_by_a, 0.0);
  sweep.x_bar_u_shaped =
      xp.transitions == 1 && xp.first_sign < 0 && xp.last_sign > 0;

  // rows by variance ascending = shape descending
  std::reverse(sweep.rows.begin(), sweep.rows.end());
  std::vector<double> e_by_var;
  e_by_var.reserve(sweep.rows.size());
  for (const auto& r : sweep.rows) e_by_var.push_back(r.e_npv);
  auto ep = diff_pattern(e_by_var, 0.0);
  sweep.transitions = ep.transitions;
  sweep.u_shaped = ep.transitions == 1 && ep.first_sign < 0 && ep.last_sign > 0;
  return sweep;
}

TwoPointTable two_point_example(double alpha, double rho, double u_mean,
                                const std::vector<double>& delta_grid) {
  auto demand = DemandFunction::constant_elasticity(alpha);
  double d_star = demand.solve_d_star(rho);
  double beta = demand.beta_factor(rho, d_star);
  double d0 = 0.5 * d_star;  // survival at the experiment point is 1/2

  TwoPointTable table;
  table.d0 = d0;
  table.d_star = d_star;
  table.beta = beta;

  double d0a = std::pow(d0, alpha);
  // Pi_A(delta) = -d0^(a+1)(u-delta) + rho/2 d0^a [(u-delta) + (beta-1)(u+delta)]
  double a0 = u_mean * d0a * (0.5 * rho * beta - d0);
  double a1 = d0a * (d0 + 0.5 * rho * (beta - 2.0));
  double b0 = (beta - 1.0) * u_mean;
  double b1 = -(beta - 1.0);
  table.crossing = (b0 - a0) / (a1 - b1);

  table.rows.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    if (delta < 0.0 || delta > u_mean)
      throw std::invalid_argument("two_point_example: delta in [0, u_mean]");
    TwoPointRow r;
    r.delta = delta;
    r.pi_a = a0 + a1 * delta;
    r.pi_b = b0 + b1 * delta;
    r.winner = r.pi_a > r.pi_b ? 'A' : 'B';
    table.rows.push_back(r);
  }
  return table;
}

CrossingReport single_crossing_check(const ExpFamily& family, double l1, double l2,
                                     int grid_size) {
  if (grid_size < 100) throw std::invalid_argument("single_crossing_check: grid >= 100");
  const double lo = family.support_lo, hi = family.support_hi;
  const double margin = 1e-6 * (hi - lo);
  Eigen::ArrayXd xs = linspace(lo + margin, hi - margin, grid_size);
  const int n = static_cast<int>(xs.size());

  // G(x | l) = x q(x) / int_x^hi q(t) dt with q = h exp(eta T); the
  // normalization cancels, and a max-shift of eta*T keeps exp in range
  auto g_curve = [&](double l) {
    double eta = family.eta(l);
    double tmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) tmax = std::max(tmax, family.T(xs[i]));
    auto q = [&](double x) {
      return family.h(x) * std::exp(eta * (family.T(x) - tmax));
    };
    std::vector<double> tail(n);
    // rightmost piece may hold an integrable singularity at the support edge
    double acc = integrate_tanh_sinh(q, xs[n - 1], hi, 1e-12);
    tail[n - 1] = acc;
    for (int i = n - 2; i >= 0; --i) {
      acc += integrate_gl(q, xs[i], xs[i + 1], 8);
      tail[i] = acc;
    }
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = xs[i] * q(xs[i]) / tail[i];
    return g;
  };

  auto g1 = g_curve(l1);
  auto g2 = g_curve(l2);

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    scale = std::max(scale, std::max(std::abs(g1[i]), std::abs(g2[i])));
  double tol = 1e-11 * std::max(scale, 1.0);

  CrossingReport rep;
  int prev_sign = 0;
  double prev_x = xs[0], prev_delta = 0.0;
  for (int i = 0; i < n; ++i) {
    double delta = g1[i] - g2[i];
    if (std::abs(delta) <= tol) continue;
    int s = delta > 0 ? 1 : -1;
    if (prev_sign != 0 && s != prev_sign) {
      ++rep.crossing_count;
      double w = prev_delta / (prev_delta - delta);
      rep.x_star = prev_x + w * (xs[i] - prev_x);
    }
    prev_sign = s;
    prev_x = xs[i];
    prev_delta = delta;
  }
  if (rep.crossing_count != 1) rep.x_star = 0.0;
  return rep;
}

bool quasiconvexity_check(const std::vector<double>& values) {
  if (values.size() < 3) throw std::invalid_argument("quasiconvexity_check: need >= 3 points");
  size_t arg_min = std::min_element(values.begin(), values.end()) - values.begin();
  for (size_t i = 0; i < arg_min; ++i)
    if (values[i] < values[i + 1]) return false;
  for (size_t i = arg_min; i + 1 < values.size(); ++i)
    if (values[i] > values[i + 1]) return false;
  return true;
}

}  // namespace lendopt

#include "lendopt/demand.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lendopt {

std::string to_string(ElasticityRegime r) {
  switch (r) {
    case ElasticityRegime::Decreasing: return "decreasing";
    case ElasticityRegime::Constant: return "constant";
    case ElasticityRegime::Increasing: return "increasing";
    case ElasticityRegime::Mixed: return "mixed";
  }
  return "?";
}

DemandFunction DemandFunction::constant_elasticity(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("constant_elasticity: alpha in (0, 1]");
  DemandFunction f;
  f.kind_ = Kind::ConstantElasticity;
  f.alpha_ = alpha;
  std::ostringstream s;
  s << "d^" << alpha;
  f.name_ = s.str();
  return f;
}

DemandFunction DemandFunction::from_callbacks(ScalarFn s, ScalarFn sprime,
                                              std::string label) {
  if (!s || !sprime) throw std::invalid_argument("from_callbacks: null callback");
  DemandFunction f;
  f.kind_ = Kind::Callbacks;
  f.s_ = std::move(s);
  f.sp_ = std::move(sprime);
  f.name_ = std::move(label);
  return f;
}

DemandFunction DemandFunction::power_exp(double alpha, double gamma, double scale) {
  if (!(alpha > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("power_exp: alpha and scale must be > 0");
  auto s = [=](double d) { return scale * std::pow(d, alpha) * std::exp(gamma * d); };
  auto sp = [=](double d) {
    return scale * std::pow(d, alpha) * std::exp(gamma * d) * (alpha + gamma * d) / d;
  };
  std::ostringstream label;
  label << scale << "*d^" << alpha << "*exp(" << gamma << " d)";
  return from_callbacks(s, sp, label.str());
}

DemandFunction DemandFunction::tabulated(std::vector<std::pair<double, double>> points) {
  if (points.size() < 4) throw std::invalid_argument("tabulated: need >= 4 points");
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (auto& [d, s] : points) {
    xs.push_back(d);
    ys.push_back(s);
  }
  DemandFunction f;
  f.kind_ = Kind::Tabulated;
  f.table_ = MonotoneCubic(xs, ys);
  f.table_pts_ = std::move(points);
  f.name_ = "tabulated";
  return f;
}

double DemandFunction::alpha() const {
  if (kind_ != Kind::ConstantElasticity)
    throw std::logic_error("alpha: not a constant-elasticity demand");
  return alpha_;
}

double DemandFunction::s(double d) const {
  switch (kind_) {
    case Kind::ConstantElasticity: return std::pow(d, alpha_);
    case Kind::Callbacks: return s_(d);
    case Kind::Tabulated: return table_(d);
  }
  return 0.0;
}

double DemandFunction::sprime(double d) const {
  switch (kind_) {
    case Kind::ConstantElasticity: return alpha_ * std::pow(d, alpha_ - 1.0);
    case Kind::Callbacks: return sp_(d);
    case Kind::Tabulated: return table_.derivative(d);
  }
  return 0.0;
}

double DemandFunction::sdoubleprime(double d) const {
  if (kind_ == Kind::ConstantElasticity)
    return alpha_ * (alpha_ - 1.0) * std::pow(d, alpha_ - 2.0);
  double h = 1e-6 * std::max(1e-3, std::abs(d));
  return (sprime(d + h) - sprime(d - h)) / (2.0 * h);
}

void DemandFunction::validate(double rho, int grid_size) const {
  if (kind_ == Kind::Tabulated) {
    // shape conditions on the data itself; the interpolant's piecewise
    // curvature wiggles even for concave tables
    double prev_slope = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < table_pts_.size(); ++i) {
      auto [d0, s0] = table_pts_[i - 1];
      auto [d1, s1] = table_pts_[i];
      if (!(s1 >= -1e-12 && s1 <= 1.0 + 1e-12))
        throw std::invalid_argument("demand: s(d) must stay in [0,1]");
      double slope = (s1 - s0) / (d1 - d0);
      if (!(slope > 0.0)) throw std::invalid_argument("demand: s' must be positive");
      if (slope > prev_slope * (1.0 + 1e-9))
        throw std::invalid_argument("demand: s'' must be <= 0");
      prev_slope = slope;
    }
    if (table_pts_.front().second > 0.1)
      throw std::invalid_argument("demand: s(0) must be 0");
    return;
  }
  Eigen::ArrayXd ds = linspace(rho * 1e-4, rho * (1.0 - 1e-6), grid_size);
  if (kind_ != Kind::ConstantElasticity) {
    // powers d^alpha vanish slowly near 0, so this is a sanity gate only
    double s0 = s(rho * 1e-10);
    if (!(s0 < 0.1 && s0 > -1e-9))
      throw std::invalid_argument("demand: s(0) must be 0");
  }
  for (int i = 0; i < ds.size(); ++i) {
    double d = ds[i];
    double v = s(d);
    if (!(v >= 0.0 && v <= 1.0 + 1e-12))
      throw std::invalid_argument("demand: s(d) must stay in [0,1]");
    if (!(sprime(d) > 0.0)) throw std::invalid_argument("demand: s' must be positive");
    if (sdoubleprime(d) > 1e-9)
      throw std::invalid_argument("demand: s'' must be <= 0");
  }
}

ElasticityProfile DemandFunction::classify_regime(double rho, int grid_size,
                                                  double tol) const {
  ElasticityProfile p;
  if (kind_ == Kind::Tabulated) {
    // elasticity straight from the data: log-log slopes over the intervals
    // (exact for power laws, no interpolant wiggle)
    int n = static_cast<int>(table_pts_.size()) - 1;
    p.d.resize(n);
    p.xi.resize(n);
    for (int i = 0; i < n; ++i) {
      auto [d0, s0] = table_pts_[i];
      auto [d1, s1] = table_pts_[i + 1];
      p.d[i] = std::sqrt(d0 * d1);
      p.xi[i] = (std::log(s1) - std::log(s0)) / (std::log(d1) - std::log(d0));
    }
  } else {
    p.d = linspace(rho * 1e-3, rho * (1.0 - 1e-3), grid_size);
    p.xi.resize(p.d.size());
    for (int i = 0; i < p.d.size(); ++i) p.xi[i] = elasticity(p.d[i]);
  }

  if (kind_ == Kind::ConstantElasticity) {
    p.regime = ElasticityRegime::Constant;
    return p;
  }
  double span = p.xi.maxCoeff() - p.xi.minCoeff();
  bool any_up = false, any_down = false;
  for (int i = 1; i < p.xi.size(); ++i) {
    double diff = p.xi[i] - p.xi[i - 1];
    if (diff > tol) any_up = true;
    if (diff < -tol) any_down = true;
  }
  if (span <= tol)
    p.regime = ElasticityRegime::Constant;
  else if (any_up && !any_down)
    p.regime = ElasticityRegime::Increasing;
  else if (any_down && !any_up)
    p.regime = ElasticityRegime::Decreasing;
  else
    p.regime = ElasticityRegime::Mixed;
  return p;
}

double DemandFunction::solve_d_star(double rho) const {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("solve_d_star: rho in (0,1)");
  auto phi = [&](double d) {
    double sv = s(d);
    return (rho - d) * sprime(d) + rho * sv * sv - sv;
  };
  double lo = rho * 1e-9, hi = rho * (1.0 - 1e-9);
  if (!(phi(lo) > 0.0) || !(phi(hi) < 0.0))
    throw std::runtime_error("solve_d_star: demand violates the bracketing conditions");
  double d = find_root(phi, lo, hi, 1e-15);
  if (std::abs(phi(d)) > 1e-12)
    throw std::runtime_error("solve_d_star: residual exceeds 1e-12");
  return d;
}

double DemandFunction::beta_factor(double rho, double d_star) const {
  double sv = s(d_star);
  return (1.0 - sv * d_star) / (1.0 - sv * rho);
}

EtaInverse::EtaInverse(const DemandFunction& demand, double rho, int table_size)
    : demand_(&demand) {
  double lo = rho * 1e-9, hi = rho - rho * 1e-9;
  Eigen::ArrayXd ds = geomspace(lo, hi, table_size);
  d_.assign(ds.data(), ds.data() + ds.size());
  eta_.resize(d_.size());
  double prev = -1.0;
  for (size_t i = 0; i < d_.size(); ++i) {
    eta_[i] = demand.eta(d_[i]);
    if (eta_[i] <= prev) throw std::runtime_error("EtaInverse: eta not increasing");
    prev = eta_[i];
  }
}

int EtaInverse::cell(double target) const {
  auto it = std::upper_bound(eta_.begin(), eta_.end(), target);
  return static_cast<int>(it - eta_.begin()) - 1;
}

double EtaInverse::operator()(double target) const {
  if (target <= eta_.front()) return d_.front();
  if (target >= eta_.back()) return d_.back();
  int lo = cell(target);
  double w = (target - eta_[lo]) / (eta_[lo + 1] - eta_[lo]);
  return d_[lo] + w * (d_[lo + 1] - d_[lo]);
}

double EtaInverse::refine(double target) const {
  if (target <= eta_.front()) return d_.front();
  if (target >= eta_.back()) return d_.back();
  int lo = cell(target);
  double a = d_[lo], b = d_[lo + 1];
  double fa = eta_[lo] - target, fb = eta_[lo + 1] - target;
  for (int i = 0; i < 60; ++i) {
    double x = a - fa * (b - a) / (fb - fa);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    double fx = demand_->eta(x) - target;
    if (std::abs(fx) < 1e-13 || b - a < 1e-15) return x;
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace lendopt

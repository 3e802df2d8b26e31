#include "lendopt/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lendopt {

namespace detail {

// regularized lower incomplete gamma P(a,x): series for x < a+1, else 1-CF
static double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

static double gamma_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double reg_lower_gamma(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_cf(a, x);
}

double reg_upper_gamma(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_cf(a, x);
}

// Lentz continued fraction for the regularized incomplete beta I_x(a,b)
static double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(lnfront);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

IncomeDistribution::IncomeDistribution(Kind k, double p1, double p2)
    : kind_(k), p1_(p1), p2_(p2) {}

IncomeDistribution IncomeDistribution::uniform() {
  IncomeDistribution d(Kind::Uniform, 0.0, 1.0);
  d.upper_ = 1.0;
  d.name_ = "uniform";
  d.finalize();
  return d;
}

IncomeDistribution IncomeDistribution::beta(double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("beta: parameters must be > 0");
  IncomeDistribution d(Kind::Beta, a, b);
  d.upper_ = 1.0;
  std::ostringstream s;
  s << "beta(" << a << "," << b << ")";
  d.name_ = s.str();
  d.finalize();
  return d;
}

IncomeDistribution IncomeDistribution::gamma(double shape, double scale) {
  if (shape <= 0.0 || scale <= 0.0)
    throw std::invalid_argument("gamma: parameters must be > 0");
  IncomeDistribution d(Kind::Gamma, shape, scale);
  d.upper_ = std::numeric_limits<double>::infinity();
  std::ostringstream s;
  s << "gamma(" << shape << "," << scale << ")";
  d.name_ = s.str();
  d.finalize();
  return d;
}

IncomeDistribution IncomeDistribution::weibull(double k, double lambda) {
  if (k <= 0.0 || lambda <= 0.0)
    throw std::invalid_argument("weibull: parameters must be > 0");
  IncomeDistribution d(Kind::Weibull, k, lambda);
  d.upper_ = std::numeric_limits<double>::infinity();
  std::ostringstream s;
  s << "weibull(" << k << "," << lambda << ")";
  d.name_ = s.str();
  d.finalize();
  return d;
}

IncomeDistribution IncomeDistribution::two_point(double center, double spread) {
  if (center <= 0.0 || spread < 0.0 || spread > center)
    throw std::invalid_argument("two_point: need 0 <= spread <= center");
  IncomeDistribution d(Kind::TwoPoint, center, spread);
  d.upper_ = center + spread;
  std::ostringstream s;
  s << "two_point(" << center << "," << spread << ")";
  d.name_ = s.str();
  d.upper_trunc_ = d.upper_;
  return d;
}

IncomeDistribution IncomeDistribution::empirical(std::vector<double> x,
                                                 std::vector<double> cdf) {
  if (x.size() != cdf.size() || x.size() < 2)
    throw std::invalid_argument("empirical: need matching x/cdf arrays, size >= 2");
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i] <= x[i - 1] || cdf[i] < cdf[i - 1])
      throw std::invalid_argument("empirical: x strictly increasing, cdf nondecreasing");
  }
  if (std::abs(cdf.front()) > 1e-12 || std::abs(cdf.back() - 1.0) > 1e-12)
    throw std::invalid_argument("empirical: cdf must run from 0 to 1");
  IncomeDistribution d(Kind::Empirical, 0.0, 0.0);
  d.ex_ = std::move(x);
  d.ecdf_ = std::move(cdf);
  d.ecdf_.front() = 0.0;
  d.ecdf_.back() = 1.0;
  d.upper_ = d.ex_.back();
  d.name_ = "empirical";
  d.upper_trunc_ = d.upper_ - 1e-9 * (d.upper_ - d.ex_.front());
  return d;
}

void IncomeDistribution::finalize() {
  // Bellman grids need a finite upper bound with positive survival. Infinite
  // supports truncate at the 1 - 1e-9 quantile; the discarded tail mass is
  // immaterial at the parameter ranges of interest.
  if (std::isfinite(upper_)) {
    upper_trunc_ = upper_ * (1.0 - 1e-12);
  } else {
    upper_trunc_ = quantile(1.0 - 1e-9);
  }
}

double IncomeDistribution::pdf(double x) const {
  switch (kind_) {
    case Kind::Uniform:
      return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case Kind::Beta: {
      if (x <= 0.0 || x >= 1.0) return 0.0;
      // log-gamma form keeps extreme shape parameters finite
      double lb = std::lgamma(p1_) + std::lgamma(p2_) - std::lgamma(p1_ + p2_);
      return std::exp((p1_ - 1.0) * std::log(x) + (p2_ - 1.0) * std::log1p(-x) - lb);
    }
    case Kind::Gamma: {
      if (x <= 0.0) return 0.0;
      double z = x / p2_;
      return std::exp((p1_ - 1.0) * std::log(z) - z - std::lgamma(p1_)) / p2_;
    }
    case Kind::Weibull: {
      if (x <= 0.0) return 0.0;
      double z = x / p2_;
      return (p1_ / p2_) * std::pow(z, p1_ - 1.0) * std::exp(-std::pow(z, p1_));
    }
    case Kind::TwoPoint:
      throw std::domain_error("two_point: density undefined at atoms");
    case Kind::Empirical: {
      if (x <= ex_.front() || x >= ex_.back()) return 0.0;
      auto it = std::upper_bound(ex_.begin(), ex_.end(), x);
      size_t hi = it - ex_.begin();
      return (ecdf_[hi] - ecdf_[hi - 1]) / (ex_[hi] - ex_[hi - 1]);
    }
  }
  return 0.0;
}

double IncomeDistribution::cdf(double x) const {
  switch (kind_) {
    case Kind::Uniform:
      return std::clamp(x, 0.0, 1.0);
    case Kind::Beta:
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return detail::reg_inc_beta(p1_, p2_, x);
    case Kind::Gamma:
      return x <= 0.0 ? 0.0 : detail::reg_lower_gamma(p1_, x / p2_);
    case Kind::Weibull:
      return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / p2_, p1_));
    case Kind::TwoPoint: {
      double lo = p1_ - p2_, hi = p1_ + p2_;
      if (x < lo) return 0.0;
      if (x < hi) return 0.5;
      return 1.0;
    }
    case Kind::Empirical: {
      if (x <= ex_.front()) return 0.0;
      if (x >= ex_.back()) return 1.0;
      auto it = std::upper_bound(ex_.begin(), ex_.end(), x);
      size_t hi = it - ex_.begin();
      double w = (x - ex_[hi - 1]) / (ex_[hi] - ex_[hi - 1]);
      return ecdf_[hi - 1] + w * (ecdf_[hi] - ecdf_[hi - 1]);
    }
  }
  return 0.0;
}

double IncomeDistribution::survival(double x) const {
  switch (kind_) {
    case Kind::Gamma:
      // upper tail computed directly for accuracy far out
      return x <= 0.0 ? 1.0 : detail::reg_upper_gamma(p1_, x / p2_);
    case Kind::Weibull:
      return x <= 0.0 ? 1.0 : std::exp(-std::pow(x / p2_, p1_));
    case Kind::Beta:
      if (x <= 0.0) return 1.0;
      if (x >= 1.0) return 0.0;
      return detail::reg_inc_beta(p2_, p1_, 1.0 - x);
    case Kind::TwoPoint: {
      // P(theta >= x), atoms included
      double lo = p1_ - p2_, hi = p1_ + p2_;
      if (x <= lo) return 1.0;
      if (x <= hi) return 0.5;
      return 0.0;
    }
    default:
      return 1.0 - cdf(x);
  }
}

double IncomeDistribution::hazard(double x) const {
  double s = survival(x);
  if (s <= 1e-300) throw std::domain_error("hazard: survival underflow");
  return pdf(x) / s;
}

double IncomeDistribution::quantile(double p) const {
  if (p < 0.0 || p > 1.0) throw std::domain_error("quantile: p outside [0,1]");
  switch (kind_) {
    case Kind::Uniform:
      return p;
    case Kind::Weibull:
      if (p >= 1.0) return std::numeric_limits<double>::infinity();
      return p2_ * std::pow(-std::log1p(-p), 1.0 / p1_);
    case Kind::TwoPoint:
      return p < 0.5 ? p1_ - p2_ : p1_ + p2_;
    case Kind::Empirical: {
      if (p <= 0.0) return ex_.front();
      if (p >= 1.0) return ex_.back();
      auto it = std::upper_bound(ecdf_.begin(), ecdf_.end(), p);
      size_t hi = std::min<size_t>(it - ecdf_.begin(), ecdf_.size() - 1);
      size_t lo = hi - 1;
      while (lo > 0 && ecdf_[lo] == ecdf_[hi]) --lo;  // skip flat spans
      double dw = ecdf_[hi] - ecdf_[lo];
      double w = dw > 0 ? (p - ecdf_[lo]) / dw : 0.0;
      return ex_[lo] + w * (ex_[hi] - ex_[lo]);
    }
    case Kind::Beta: {
      if (p <= 0.0) return 0.0;
      if (p >= 1.0) return 1.0;
      double hi = 1.0 - 1e-15;
      if (cdf(hi) <= p) return hi;  // saturated within double resolution
      auto f = [&](double x) { return cdf(x) - p; };
      return find_root(f, 1e-15, hi, 1e-14);
    }
    case Kind::Gamma: {
      if (p <= 0.0) return 0.0;
      if (p >= 1.0) return std::numeric_limits<double>::infinity();
      double hi = p1_ * p2_ + p2_;
      while (cdf(hi) < p && hi < 1e300) hi *= 2.0;
      auto f = [&](double x) { return cdf(x) - p; };
      return find_root(f, 0.0, hi, 1e-13 * hi);
    }
  }
  return 0.0;
}

double IncomeDistribution::mean() const {
  switch (kind_) {
    case Kind::Uniform:
      return 0.5;
    case Kind::Beta:
      return p1_ / (p1_ + p2_);
    case Kind::Gamma:
      return p1_ * p2_;
    case Kind::Weibull:
      return p2_ * std::tgamma(1.0 + 1.0 / p1_);
    case Kind::TwoPoint:
      return p1_;
    case Kind::Empirical: {
      double m = 0.0;
      for (size_t i = 1; i < ex_.size(); ++i)
        m += 0.5 * (ex_[i] + ex_[i - 1]) * (ecdf_[i] - ecdf_[i - 1]);
      return m;
    }
  }
  return 0.0;
}

double IncomeDistribution::g_value(double x) const {
  if (!continuous()) throw std::domain_error("g_value: atom distribution has no density");
  if (x < 0.0 || x >= upper_) throw std::domain_error("g_value: x outside support");
  double s = survival(x);
  if (s <= 1e-300) throw std::domain_error("g_value: survival underflow");
  return x * pdf(x) / s;
}

double IncomeDistribution::g_inverse(double target) const {
  if (!(target > 0.0)) throw std::domain_error("g_inverse: target must be positive");
  double hi = upper_trunc_;
  double lo = hi * 1e-14;
  double glo = g_value(lo);
  if (glo >= target) {
    // attained range starts essentially at 0; walk further down
    while (glo >= target && lo > 1e-290) {
      lo *= 1e-2;
      glo = g_value(lo);
    }
    if (glo >= target) throw std::runtime_error("g_inverse: target below attained range");
  }
  double ghi = g_value(hi);
  if (ghi <= target) throw std::runtime_error("g_inverse: target above attained range");
  auto f = [&](double x) { return g_value(x) - target; };
  return find_root(f, lo, hi, 1e-12 * std::max(1.0, hi));
}

double IncomeDistribution::conditional_survival(double y, double x) const {
  if (x > y) throw std::domain_error("conditional_survival: need x <= y");
  double sx = survival(x);
  if (sx <= 0.0) throw std::domain_error("conditional_survival: conditioning on null event");
  double r = survival(y) / sx;
  return std::clamp(r, 0.0, 1.0);
}

Assumption1Report IncomeDistribution::check_assumption1(int grid_size) const {
  if (grid_size < 100) throw std::invalid_argument("check_assumption1: grid_size >= 100");
  if (!continuous()) throw std::domain_error("check_assumption1: continuous families only");
  double hi = upper_trunc_;
  // log-dense near zero plus a uniform sweep of the bulk
  int half = grid_size / 2;
  Eigen::ArrayXd g1 = geomspace(hi * 1e-8, hi, half);
  Eigen::ArrayXd g2 = linspace(hi / grid_size, hi, grid_size - half);
  std::vector<double> xs(g1.data(), g1.data() + g1.size());
  xs.insert(xs.end(), g2.data(), g2.data() + g2.size());
  std::sort(xs.begin(), xs.end());
  double sep = hi * 1e-10;  // coincident points would only measure roundoff
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [sep](double u, double v) { return v - u < sep; }),
           xs.end());

  Assumption1Report rep;
  rep.monotone = true;
  double prev = g_value(xs.front());
  rep.g_at_zero = prev;
  for (size_t i = 1; i < xs.size(); ++i) {
    double cur = g_value(xs[i]);
    if (cur <= prev) rep.monotone = false;
    prev = cur;
  }
  rep.g_at_upper = prev;
  return rep;
}

bool IncomeDistribution::increasing_hazard(int grid_size) const {
  if (!continuous()) return false;
  double hi = upper_trunc_;
  Eigen::ArrayXd xs = linspace(hi * 1e-6, hi, grid_size);
  double prev = hazard(xs[0]);
  for (int i = 1; i < xs.size(); ++i) {
    double cur = hazard(xs[i]);
    if (cur - prev < -1e-9 * std::max(1.0, std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

}  // namespace lendopt

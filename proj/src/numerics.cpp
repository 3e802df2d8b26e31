#include "lendopt/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace lendopt {

double find_root(const ScalarFn& f, double lo, double hi, double xtol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream msg;
    msg << "find_root: no bracket, f(" << lo << ")=" << flo << " f(" << hi << ")=" << fhi;
    throw std::runtime_error(msg.str());
  }
  // Illinois false position: halving the retained endpoint's weight keeps
  // the superlinear step even when the bracket slopes are wildly uneven
  int side = 0;
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    double x;
    if (it % 8 == 7) {
      x = 0.5 * (lo + hi);
    } else {
      x = (flo * hi - fhi * lo) / (flo - fhi);
      double guard = 1e-12 * (hi - lo);
      if (!(x > lo + guard && x < hi - guard)) x = 0.5 * (lo + hi);
    }
    double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return (flo * hi - fhi * lo) / (flo - fhi);
}

double golden_max(const ScalarFn& f, double a, double b, double xtol, int max_iter) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  static const double inv_phi2 = (3.0 - std::sqrt(5.0)) / 2.0;
  if (b <= a) return a;
  double h = b - a;
  double c = a + inv_phi2 * h;
  double d = a + inv_phi * h;
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && h > xtol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      h = b - a;
      c = a + inv_phi2 * h;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      h = b - a;
      d = a + inv_phi * h;
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

const GaussLegendre& GaussLegendre::get(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration on P_n starting from the Chebyshev estimate
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  auto [pos, ok] = cache.emplace(n, std::move(gl));
  return pos->second;
}

double integrate_gl(const ScalarFn& f, double a, double b, int n) {
  const auto& gl = GaussLegendre::get(n);
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  KahanAccumulator acc;
  for (int i = 0; i < n; ++i) acc.add(gl.weights[i] * f(mid + half * gl.nodes[i]));
  return half * acc.value();
}

double integrate_tanh_sinh_edges(const EdgeAwareFn& f, double a, double b,
                                 double eps, int max_level) {
  // transform to [-1,1]: x = mid + half*tanh(pi/2 sinh t); endpoint distances
  // come from exp forms of 1 -/+ tanh so the tails never cancel to zero
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  auto g = [&](double t) -> double {
    double st = std::sinh(t);
    double z = M_PI_2 * st;
    double e2 = std::exp(-2.0 * std::abs(z));
    double near_edge = 2.0 * e2 / (1.0 + e2);  // 1 - |tanh z|
    double far_edge = 2.0 / (1.0 + e2);        // 1 + |tanh z|
    double dist_a = half * (z >= 0 ? far_edge : near_edge);
    double dist_b = half * (z >= 0 ? near_edge : far_edge);
    if (dist_a <= 0.0 || dist_b <= 0.0) return 0.0;
    double x = mid + half * std::tanh(z);
    double w = M_PI_2 * std::cosh(t) / std::pow(std::cosh(z), 2);
    double v = f(x, dist_a, dist_b) * w;
    return std::isfinite(v) ? v : 0.0;
  };
  const double tmax = 6.0;
  double h = 1.0;
  KahanAccumulator samples;  // running sum of g over the current abscissa set
  samples.add(g(0.0));
  for (double t = h; t <= tmax; t += h) {
    samples.add(g(t));
    samples.add(g(-t));
  }
  double integral = h * samples.value();
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    for (double t = h; t <= tmax; t += 2.0 * h) {
      samples.add(g(t));
      samples.add(g(-t));
    }
    double prev = integral;
    integral = h * samples.value();
    if (level >= 4 && std::abs(integral - prev) <= eps * (std::abs(integral) + 1e-300)) {
      break;
    }
  }
  return half * integral;
}

double integrate_tanh_sinh(const ScalarFn& f, double a, double b, double eps,
                           int max_level) {
  return integrate_tanh_sinh_edges(
      [&f](double x, double, double) { return f(x); }, a, b, eps, max_level);
}

Eigen::ArrayXd linspace(double lo, double hi, int n) {
  if (n <= 1) {
    Eigen::ArrayXd v(1);
    v[0] = lo;
    return v;
  }
  return Eigen::ArrayXd::LinSpaced(n, lo, hi);
}

Eigen::ArrayXd geomspace(double lo, double hi, int n) {
  Eigen::ArrayXd v = linspace(std::log(lo), std::log(hi), n);
  return v.exp();
}

Eigen::ArrayXd state_grid(double upper, int n, double band_center, bool refine) {
  std::vector<double> xs;
  xs.reserve(static_cast<size_t>(n) * 2);
  double h = upper / (n - 1);
  for (int i = 0; i < n; ++i) xs.push_back(i * h);
  if (refine && band_center > 0.0) {
    double lo = std::max(0.0, 0.8 * band_center);
    double hi = std::min(upper, 1.2 * band_center);
    for (double x = lo; x < hi; x += h / 4.0) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double u, double v) { return std::abs(u - v) < 1e-15; }),
           xs.end());
  return Eigen::Map<Eigen::ArrayXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  pool.reserve(jobs);
  int block = (n + jobs - 1) / jobs;
  for (int w = 0; w < jobs; ++w) {
    int lo = w * block;
    int hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&body, &errors, w, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double interp_linear(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, double q) {
  int n = static_cast<int>(x.size());
  if (q <= x[0]) return y[0];
  if (q >= x[n - 1]) return y[n - 1];
  const double* beg = x.data();
  int hi = static_cast<int>(std::upper_bound(beg, beg + n, q) - beg);
  int lo = hi - 1;
  double w = (q - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + w * (y[hi] - y[lo]);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need >=2 points");
  std::vector<double> d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    double dx = x_[i + 1] - x_[i];
    if (dx <= 0) throw std::invalid_argument("MonotoneCubic: abscissae must increase");
    d[i] = (y_[i + 1] - y_[i]) / dx;
  }
  m_.assign(n, 0.0);
  m_[0] = d[0];
  m_[n - 1] = d[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m_[i] = 0.0;
    } else {
      double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
      double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
}

int MonotoneCubic::segment(double q) const {
  int n = static_cast<int>(x_.size());
  int hi = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), q) - x_.begin());
  if (hi <= 0) return 0;
  if (hi >= n) return n - 2;
  return hi - 1;
}

double MonotoneCubic::operator()(double q) const {
  if (q <= x_.front()) return y_.front() + m_.front() * (q - x_.front());
  if (q >= x_.back()) return y_.back() + m_.back() * (q - x_.back());
  int i = segment(q);
  double h = x_[i + 1] - x_[i];
  double t = (q - x_[i]) / h;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  double h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t);
  double h11 = t * t * (t - 1);
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::derivative(double q) const {
  if (q <= x_.front()) return m_.front();
  if (q >= x_.back()) return m_.back();
  int i = segment(q);
  double h = x_[i + 1] - x_[i];
  double t = (q - x_[i]) / h;
  double dh00 = (6 * t * t - 6 * t) / h;
  double dh10 = (3 * t * t - 4 * t + 1);
  double dh01 = (6 * t - 6 * t * t) / h;
  double dh11 = (3 * t * t - 2 * t);
  return dh00 * y_[i] + dh10 * m_[i] + dh01 * y_[i + 1] + dh11 * m_[i + 1];
}

}  // namespace lendopt

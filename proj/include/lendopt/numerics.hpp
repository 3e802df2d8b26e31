#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace lendopt {

using ScalarFn = std::function<double(double)>;

/// Bracketing root search: Illinois false position with periodic bisection
/// steps. Requires f(lo) and f(hi) of opposite sign; converges to
/// |hi - lo| <= xtol.
double find_root(const ScalarFn& f, double lo, double hi, double xtol = 1e-10,
                 int max_iter = 200);

/// Golden-section maximization of a unimodal function on [a, b].
/// Returns the abscissa of the maximum to within xtol.
double golden_max(const ScalarFn& f, double a, double b, double xtol = 1e-10,
                  int max_iter = 300);

/// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
struct GaussLegendre {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
  static const GaussLegendre& get(int n);
};

double integrate_gl(const ScalarFn& f, double a, double b, int n = 64);

/// Tanh-sinh (double exponential) quadrature on [a, b]. Tolerates integrable
/// endpoint singularities.
double integrate_tanh_sinh(const ScalarFn& f, double a, double b,
                           double eps = 1e-12, int max_level = 12);

/// Variant passing the integrand its distances to both endpoints, computed
/// without cancellation. Use for integrands singular like (x-a)^p or
/// (b-x)^p, where forming the distance from x itself loses the tail.
using EdgeAwareFn = std::function<double(double x, double dist_a, double dist_b)>;
double integrate_tanh_sinh_edges(const EdgeAwareFn& f, double a, double b,
                                 double eps = 1e-12, int max_level = 12);

struct KahanAccumulator {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

Eigen::ArrayXd linspace(double lo, double hi, int n);
Eigen::ArrayXd geomspace(double lo, double hi, int n);

/// Uniform grid on [0, upper] with an optional x4 refinement band around
/// band_center (policy curvature concentrates near the lending threshold).
Eigen::ArrayXd state_grid(double upper, int n, double band_center, bool refine);

/// Run body(i) for i in [0, n) across `jobs` threads. Work is split into
/// fixed contiguous blocks so results never depend on scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& body);

/// Piecewise-linear interpolation over sorted abscissae. Clamps outside.
double interp_linear(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, double q);

/// Fritsch-Carlson monotone cubic interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double q) const;
  double derivative(double q) const;
  bool empty() const { return x_.empty(); }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  int segment(double q) const;
  std::vector<double> x_, y_, m_;  // m_: node derivatives
};

}  // namespace lendopt

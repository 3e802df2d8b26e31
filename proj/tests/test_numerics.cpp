#include "lendopt/numerics.hpp"

#include <atomic>
#include <cmath>

#include "test_util.hpp"

using namespace lendopt;

static void root_finding() {
  double r = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK_CLOSE(r, std::sqrt(2.0), 1e-12);

  // steep bracket: f spans twelve orders of magnitude
  auto g = [](double x) { return x / (1.0 - x) - 0.5; };
  double xr = find_root(g, 1e-14, 1.0 - 1e-12, 1e-13);
  CHECK_CLOSE(xr, 1.0 / 3.0, 1e-10);

  CHECK_THROWS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0),
               std::runtime_error);
}

static void golden_section() {
  double m = golden_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0,
                        1e-12);
  CHECK_CLOSE(m, 0.3, 1e-9);
  // maximum at the left edge
  double e = golden_max([](double x) { return -x; }, 0.2, 0.9, 1e-12);
  CHECK_CLOSE(e, 0.2, 1e-8);
}

static void quadrature() {
  double s = integrate_gl([](double x) { return std::sin(x); }, 0.0, M_PI, 32);
  CHECK_CLOSE(s, 2.0, 1e-13);

  // the plain form loses the ulp^(1/2) sliver at the singular endpoint
  double inv_sqrt = integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); },
                                        0.0, 1.0, 1e-13);
  CHECK_CLOSE(inv_sqrt, 2.0, 5e-8);

  // x^(-0.7) needs the stable endpoint distance to keep its tail mass
  double p = integrate_tanh_sinh_edges(
      [](double, double da, double) { return std::pow(da, -0.7); }, 0.0, 1.0, 1e-14,
      13);
  CHECK_CLOSE(p, 1.0 / 0.3, 1e-9);
}

static void kahan() {
  KahanAccumulator acc;
  for (int i = 0; i < 10000000; ++i) acc.add(0.1);
  CHECK_CLOSE(acc.value(), 1e6, 1e-7);
}

static void interpolation() {
  Eigen::ArrayXd x = linspace(0.0, 1.0, 11);
  Eigen::ArrayXd y = 2.0 * x + 1.0;
  CHECK_CLOSE(interp_linear(x, y, 0.55), 2.1, 1e-14);
  CHECK_CLOSE(interp_linear(x, y, -1.0), 1.0, 0.0);  // clamps
  CHECK_CLOSE(interp_linear(x, y, 2.0), 3.0, 0.0);

  MonotoneCubic mc({0.0, 0.5, 1.0, 2.0}, {0.0, 1.0, 1.5, 1.6});
  double prev = -1.0;
  for (double q = 0.0; q <= 2.0; q += 0.01) {
    double v = mc(q);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  MonotoneCubic lin({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK_CLOSE(lin(1.7), 4.4, 1e-12);
  CHECK_CLOSE(lin.derivative(2.5), 2.0, 1e-12);
}

static void grids_and_parallel() {
  Eigen::ArrayXd g = state_grid(1.0, 101, 0.4, true);
  CHECK(g.size() > 101);
  for (int i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK_CLOSE(g[0], 0.0, 0.0);
  CHECK_CLOSE(g[g.size() - 1], 1.0, 1e-12);

  std::atomic<long long> total{0};
  parallel_for(1000, 7, [&](int i) { total += i; });
  CHECK(total.load() == 999LL * 1000 / 2);
  CHECK_THROWS(parallel_for(8, 4,
                            [](int i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

int main() {
  root_finding();
  golden_section();
  quadrature();
  kahan();
  interpolation();
  grids_and_parallel();
  return testutil::summary("numerics");
}

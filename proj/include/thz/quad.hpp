#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace thz {

// Adaptive Gauss-Kronrod (G7/K15) quadrature. Value type may be double or
// std::complex<double>; the error estimate is always a real magnitude.

namespace gk {

// 15-point Kronrod nodes on [-1,1] (symmetric; only non-negative half stored)
// and weights, with the embedded 7-point Gauss weights.
inline constexpr double xk[8] = {
    0.0, 0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993945, 0.8648644233597691, 0.9491079123427585,
    0.9914553711208126};
inline constexpr double wk[8] = {
    0.2094821410847278, 0.2044329400752989, 0.1903505780647854,
    0.1690047266392679, 0.1406532597155259, 0.1047900103222502,
    0.0630920926299786, 0.0229353220105292};
inline constexpr double wg[4] = {
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
    0.1294849661688697};

}  // namespace gk

template <typename F>
auto gauss_kronrod(const F& f, double a, double b,
                   double* err_out = nullptr) -> decltype(f(0.0)) {
  using V = decltype(f(0.0));
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  V fc = f(c);
  V ik = gk::wk[0] * fc;
  V ig = gk::wg[0] * fc;
  for (int j = 1; j < 8; ++j) {
    V fp = f(c + h * gk::xk[j]);
    V fm = f(c - h * gk::xk[j]);
    ik += gk::wk[j] * (fp + fm);
    if (j % 2 == 0) ig += gk::wg[j / 2] * (fp + fm);
  }
  ik *= h;
  ig *= h;
  if (err_out) *err_out = std::abs(ik - ig);
  return ik;
}

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_depth = 48;
  std::size_t max_evals = 4'000'000;
  int initial_splits = 8;  // guards against deceptively smooth-looking spikes
};

// Recursive bisection on [a,b].
template <typename F>
auto integrate(const F& f, double a, double b,
               const QuadOptions& opt = {}) -> decltype(f(0.0)) {
  using V = decltype(f(0.0));
  struct Seg {
    double a, b;
    int depth;
  };
  std::vector<Seg> stack;
  int splits = std::max(1, opt.initial_splits);
  for (int i = 0; i < splits; ++i) {
    double sa = a + (b - a) * i / splits;
    double sb = a + (b - a) * (i + 1) / splits;
    stack.push_back({sa, sb, 0});
  }
  V total{};
  double scale = 0.0;
  double err_sum = 0.0;
  std::size_t evals = 0;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    double err = 0.0;
    V v = gauss_kronrod(f, s.a, s.b, &err);
    evals += 15;
    scale = std::max(scale, std::abs(v));
    double local_tol =
        std::max(opt.abs_tol, opt.rel_tol * scale) * (s.b - s.a) / (b - a);
    if (err <= local_tol || s.depth >= opt.max_depth ||
        evals > opt.max_evals) {
      total += v;
      err_sum += err;
    } else {
      double m = 0.5 * (s.a + s.b);
      stack.push_back({s.a, m, s.depth + 1});
      stack.push_back({m, s.b, s.depth + 1});
    }
  }
  (void)err_sum;
  return total;
}

// Integral over [0, inf) via x = t/(1-t).
template <typename F>
auto integrate_0_inf(const F& f, const QuadOptions& opt = {})
    -> decltype(f(0.0)) {
  auto g = [&](double t) {
    double u = 1.0 - t;
    double x = t / u;
    return f(x) * (1.0 / (u * u));
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
// iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = xi;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        double dx = p1 / dp;
        xi -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      x[i] = -xi;
      x[n - 1 - i] = xi;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
  }
};

}  // namespace thz

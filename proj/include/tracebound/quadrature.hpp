#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature plus fixed-order Gauss-Legendre
// rules. All integrals in this project are over finite intervals; infinite
// tails are truncated by the caller using compact support or decay estimates.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace tracebound {

// Absolute tolerance used by default for every quadrature in the library.
// TRACE_BOUND_TOL overrides it process-wide.
inline double quad_tolerance() {
  static const double tol = [] {
    if (const char* env = std::getenv("TRACE_BOUND_TOL")) {
      const double v = std::atof(env);
      if (v > 0.0 && v < 1.0) return v;
    }
    return 1e-9;
  }();
  return tol;
}

namespace qk {

// 15-point Kronrod nodes on [-1,1] and weights; the embedded 7-point Gauss
// rule uses the odd-indexed nodes.
inline constexpr double xk[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

inline constexpr double wk[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

inline constexpr double wg[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

}  // namespace qk

namespace detail {

template <class F>
void gk15(F&& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double rk = 0.0, rg = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fv = f(c + h * qk::xk[i]);
    rk += qk::wk[i] * fv;
    if (i % 2 == 1) rg += qk::wg[i / 2] * fv;
  }
  result = rk * h;
  err = std::abs((rk - rg) * h);
}

template <class F>
double adapt(F&& f, double a, double b, double tol, int depth) {
  double r, e;
  gk15(f, a, b, r, e);
  if (e <= tol || depth >= 48 || b - a < 1e-15 * (1.0 + std::abs(a))) {
    if (!std::isfinite(r)) throw std::runtime_error("quadrature: non-finite integrand");
    return r;
  }
  const double c = 0.5 * (a + b);
  return adapt(f, a, c, 0.5 * tol, depth + 1) + adapt(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Adaptive integral of f over [a,b] to absolute tolerance tol.
template <class F>
double integrate(F&& f, double a, double b, double tol = quad_tolerance()) {
  if (!(a < b)) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("integrate: infinite endpoint");
  return detail::adapt(f, a, b, std::max(tol, 1e-15), 0);
}

// Fixed-order Gauss-Legendre nodes/weights on [-1,1], computed once per order
// by Newton iteration on the Legendre polynomial.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static thread_local std::vector<std::pair<int, std::pair<std::vector<double>, std::vector<double>>>> cache;
  for (auto& entry : cache)
    if (entry.first == n) return entry.second;
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  cache.push_back({n, {std::move(x), std::move(w)}});
  return cache.back().second;
}

// Fixed-order Gauss-Legendre integral of f over [a,b].
template <class F>
double integrate_gl(F&& f, double a, double b, int order) {
  if (!(a < b)) return 0.0;
  const auto& [x, w] = gauss_legendre(order);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += w[i] * f(c + h * x[i]);
  return s * h;
}

}  // namespace tracebound

#pragma once

// Admissible even test-function pairs (h, hhat) and the transforms between
// hhat and the bi-K-invariant kernel phi at real and complex places.
//
// hhat is built as a normalized self-convolution of a smooth bump, so that
// h = FT(hhat) is a square (hence nonnegative on the real axis) and strictly
// positive on the imaginary axis. A rescaling step guarantees strict
// positivity of h on [-1/2, 1/2] and pins the support of hhat inside [-1, 1].

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "quadrature.hpp"

namespace tracebound {

enum class ArchPlaceKind { Real, Complex };

inline int place_epsilon(ArchPlaceKind k) { return k == ArchPlaceKind::Real ? 0 : 1; }

namespace detail {

// Mollifier exp(-1/(1-t^2)) on (-1,1), extended by zero.
inline double bump_unit(double t) {
  const double u = 1.0 - t * t;
  return u > 1e-12 ? std::exp(-1.0 / u) : 0.0;
}

inline double bump_unit_prime(double t) {
  const double u = 1.0 - t * t;
  if (u <= 1e-12) return 0.0;
  return bump_unit(t) * (-2.0 * t / (u * u));
}

// Frozen base data shared (immutably) by every pair derived from one bump:
// samples of f = (g0*g0)/(g0*g0)(0) and its first two derivatives on a
// uniform grid of [0, 2b], plus the first positive real zero of FT(g0).
struct BumpBase {
  double b = 1.0;       // bump half-width
  double step = 0.0;    // grid spacing in the convolution variable
  std::vector<double> f0, f1, f2;
  double fourier_zero = 0.0;  // first positive zero of FT(g0)
  double f2_at_zero = 0.0;

  double ymax() const { return 2.0 * b; }

  // Cubic Hermite interpolation of the table (v, dv) at y in [0, 2b].
  double hermite(const std::vector<double>& v, const std::vector<double>& dv, double y) const {
    if (y >= ymax()) return 0.0;
    const double s = y / step;
    std::size_t j = std::min<std::size_t>(std::size_t(s), v.size() - 2);
    const double t = s - double(j);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * v[j] + h10 * step * dv[j] + h01 * v[j + 1] + h11 * step * dv[j + 1];
  }
};

inline std::shared_ptr<const BumpBase> make_bump_base(double b, double resolution) {
  auto base = std::make_shared<BumpBase>();
  base->b = b;
  std::size_t n = std::size_t(std::ceil(2.0 * b / resolution)) + 1;
  n = std::max<std::size_t>(n, 1001);
  base->step = 2.0 * b / double(n - 1);
  base->f0.resize(n);
  base->f1.resize(n);
  base->f2.resize(n);

  auto g0 = [b](double t) { return bump_unit(t / b); };
  auto g0p = [b](double t) { return bump_unit_prime(t / b) / b; };

  // (g0*g0)(y), (g0'*g0)(y), (g0'*g0')(y) by fixed high-order Gauss on the
  // overlap interval; the integrands are smooth with flat endpoints.
  auto conv = [&](auto&& u, auto&& v, double y) {
    const double lo = std::max(-b, y - b), hi = std::min(b, y + b);
    if (lo >= hi) return 0.0;
    return integrate_gl([&](double tau) { return u(tau) * v(y - tau); }, lo, hi, 96);
  };
  const double norm = conv(g0, g0, 0.0);
  if (norm <= 0.0) throw std::runtime_error("test function bump is degenerate");
  for (std::size_t j = 0; j < n; ++j) {
    const double y = double(j) * base->step;
    base->f0[j] = conv(g0, g0, y) / norm;
    base->f1[j] = conv(g0p, g0, y) / norm;
    base->f2[j] = conv(g0p, g0p, y) / norm;
  }
  base->f0.back() = base->f1.back() = base->f2.back() = 0.0;
  base->f2_at_zero = base->f2[0];

  // First positive real zero of FT(g0): scan then bisect.
  auto ft = [&](double xi) {
    return 2.0 * integrate_gl([&](double t) { return g0(t) * std::cos(2.0 * M_PI * xi * t); }, 0.0, b, 96);
  };
  double lo = 0.0, hi = 0.0, prev = ft(0.0);
  for (double xi = 0.02 / b; xi < 40.0 / b; xi += 0.02 / b) {
    const double cur = ft(xi);
    if (prev > 0.0 && cur <= 0.0) {
      lo = xi - 0.02 / b;
      hi = xi;
      break;
    }
    prev = cur;
  }
  if (hi == 0.0) throw std::runtime_error("test function bump: no transform zero found");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ft(mid) > 0.0 ? lo : hi) = mid;
  }
  base->fourier_zero = 0.5 * (lo + hi);
  return base;
}

}  // namespace detail

class TestFunctionPair {
 public:
  double support_radius = 0.0;   // hhat(x) = 0 for |x| > support_radius
  double positivity_scale = 0.0; // delta found by the bisection search
  double grid_resolution = 0.0;  // sample spacing in the final argument

  // hhat(x) = base_f0(lambda * |x|); even, zero outside the support.
  double hhat(double x) const {
    const double y = lambda_ * std::abs(x);
    if (y >= base_->ymax()) return 0.0;
    return base_->hermite(base_->f0, base_->f1, y);
  }

  // d/dx hhat(x); odd.
  double hhat_prime(double x) const {
    const double y = lambda_ * std::abs(x);
    if (y >= base_->ymax()) return 0.0;
    const double v = lambda_ * base_->hermite(base_->f1, base_->f2, y);
    return x >= 0.0 ? v : -v;
  }

  double hhat_second_at_zero() const { return lambda_ * lambda_ * base_->f2_at_zero; }

  double scale_factor() const { return lambda_; }
  const std::shared_ptr<const detail::BumpBase>& base() const { return base_; }

  friend TestFunctionPair build_base_pair(double, double);
  friend TestFunctionPair scale_pair(const TestFunctionPair&, double);

 private:
  std::shared_ptr<const detail::BumpBase> base_;
  double lambda_ = 1.0;
};

inline double h_eval(const TestFunctionPair& pair, std::complex<double> z);

// Builds the admissible pair: g1 = g0*g0 on [-2b, 2b], hhat1 = g1/g1(0),
// then rescales by the largest delta in (0,1] keeping h and h(i.) strictly
// positive on [-1/2,1/2] (with a 10% margin), and finally normalizes the
// support radius to at most 1.
inline TestFunctionPair build_base_pair(double bump_support, double grid_resolution) {
  if (!(bump_support > 0.0)) throw std::invalid_argument("build_base_pair: bump_support must be positive");
  if (!(grid_resolution > 0.0) || 2.0 * bump_support / grid_resolution < 1e3 - 1)
    throw std::invalid_argument("build_base_pair: grid too coarse, need >= 1e3 samples over the support");

  TestFunctionPair p;
  p.base_ = detail::make_bump_base(bump_support, grid_resolution);

  // delta search: h_delta(z) is h1(delta z) up to a positive constant, where
  // h1 is the transform of hhat1. Tabulate h1 on the real and imaginary
  // segments once, then bisect for the largest delta in (0,1] whose
  // 1001-point grid of [-1/2,1/2] stays strictly positive; keep 10% margin.
  const auto& base = *p.base_;
  const int ngrid = 1001;
  std::vector<double> h1_re(ngrid), h1_im(ngrid);
  for (int j = 0; j < ngrid; ++j) {
    const double xi = 0.5 * double(j) / double(ngrid - 1);
    auto fre = [&](double y) { return base.hermite(base.f0, base.f1, y) * std::cos(2.0 * M_PI * xi * y); };
    auto fim = [&](double y) { return base.hermite(base.f0, base.f1, y) * std::cosh(2.0 * M_PI * xi * y); };
    h1_re[j] = integrate_gl(fre, 0.0, base.ymax(), 128);
    h1_im[j] = integrate_gl(fim, 0.0, base.ymax(), 128);
  }
  auto positive_on_window = [&](double delta) {
    for (int j = 0; j < ngrid; ++j) {
      // grid point x_j = j/(2(ngrid-1)); h_delta(x_j) ~ h1(delta x_j)
      const double s = delta * double(j);  // index into the h1 tables
      const int k = std::min(int(s), ngrid - 2);
      const double t = s - double(k);
      if ((1.0 - t) * h1_re[k] + t * h1_re[k + 1] <= 0.0) return false;
      if ((1.0 - t) * h1_im[k] + t * h1_im[k + 1] <= 0.0) return false;
    }
    return true;
  };
  double lo = 1e-9, hi = 1.0;
  if (!positive_on_window(lo)) throw std::runtime_error("build_base_pair: defective bump, positivity search failed");
  if (positive_on_window(hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (positive_on_window(mid) ? lo : hi) = mid;
    }
  }
  const double delta = std::min(1.0, 0.9 * lo);
  p.positivity_scale = delta;
  p.support_radius = std::min(1.0, 2.0 * bump_support * delta);
  p.lambda_ = 2.0 * bump_support / p.support_radius;
  p.grid_resolution = p.base_->step / p.lambda_;

  for (int j = 0; j < 21; ++j) {
    const double x = 0.5 * double(j) / 20.0;
    if (h_eval(p, {x, 0.0}) <= 0.0 || h_eval(p, {0.0, x}) <= 0.0)
      throw std::runtime_error("build_base_pair: defective bump, h not positive on [-1/2,1/2]");
  }
  return p;
}

// hhat_t(x) = hhat(t x): support shrinks by t and h_t(z) = h(z/t)/t.
inline TestFunctionPair scale_pair(const TestFunctionPair& pair, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("scale_pair: t must be positive");
  TestFunctionPair p = pair;
  p.lambda_ = pair.scale_factor() * t;
  p.support_radius = pair.support_radius / t;
  p.grid_resolution = pair.grid_resolution / t;
  return p;
}

// h(z) = int hhat(x) e^{-2 pi i z x} dx, evaluated on the real axis or on the
// imaginary segment |Im z| <= 1/2; anywhere else is rejected.
inline double h_eval(const TestFunctionPair& pair, std::complex<double> z) {
  const double sup = pair.support_radius;
  const double tol = std::min(quad_tolerance(), 1e-13);
  if (std::abs(z.imag()) < 1e-14) {
    const double x = z.real();
    return 2.0 * integrate([&](double t) { return pair.hhat(t) * std::cos(2.0 * M_PI * x * t); }, 0.0, sup, tol);
  }
  if (std::abs(z.real()) < 1e-14) {
    const double y = z.imag();
    if (std::abs(y) > 0.5 + 1e-12)
      throw std::domain_error("h_eval: imaginary argument outside [-1/2, 1/2]");
    return 2.0 * integrate([&](double t) { return pair.hhat(t) * std::cosh(2.0 * M_PI * y * t); }, 0.0, sup, tol);
  }
  throw std::domain_error("h_eval: argument must lie on the real or imaginary axis");
}

// phi(r): value of the bi-K-invariant kernel on diag(e^{-r/2}, e^{r/2}).
//
// Real place: -(1/4pi^2) int_{r/2pi}^inf hhat'(t) / sqrt(sinh^2(pi t) - sinh^2(r/2)) dt,
// computed after the substitution u^2 = sinh^2(pi t) - sinh^2(r/2) which
// removes the endpoint singularity.
// Complex place: -hhat'(r/pi) / (2 pi^3 sinh r), with the r -> 0 limit taken
// from the series of hhat' at 0.
inline double phi_eval(const TestFunctionPair& pair, ArchPlaceKind kind, double r) {
  if (r < 0.0) throw std::invalid_argument("phi_eval: r must be >= 0");
  const double sup = pair.support_radius;
  if (kind == ArchPlaceKind::Complex) {
    if (r / M_PI >= sup) return 0.0;
    if (r < 1e-5) return -pair.hhat_second_at_zero() / (2.0 * std::pow(M_PI, 4));
    return -pair.hhat_prime(r / M_PI) / (2.0 * std::pow(M_PI, 3) * std::sinh(r));
  }
  const double s = std::sinh(0.5 * r);
  const double cap = std::sinh(M_PI * sup);
  if (s >= cap) return 0.0;
  const double U = std::sqrt(cap * cap - s * s);
  const double s2 = s * s;
  auto f = [&](double u) {
    const double q = u * u + s2;
    const double t = std::asinh(std::sqrt(q)) / M_PI;
    return pair.hhat_prime(t) / std::sqrt(q * (1.0 + q));
  };
  return -integrate(f, 0.0, U, std::min(quad_tolerance(), 1e-11)) / (4.0 * std::pow(M_PI, 3));
}

// Forward transform of phi back to hhat; the round-trip verifier.
// Real place: 2 pi int_{2 pi t}^inf phi(r) sinh r / sqrt(sinh^2(r/2) - sinh^2(pi t)) dr,
// desingularized by w^2 = sinh^2(r/2) - sinh^2(pi t) (giving 8 pi int phi dw).
// Complex place: 2 pi^2 int_{pi t}^inf phi(r) sinh r dr.
inline double phi_to_hhat(const TestFunctionPair& pair, ArchPlaceKind kind, double t) {
  if (t < 0.0) throw std::invalid_argument("phi_to_hhat: t must be >= 0");
  const double sup = pair.support_radius;
  const double R = 2.0 * M_PI * sup / (1 + place_epsilon(kind));
  if (kind == ArchPlaceKind::Complex) {
    if (M_PI * t >= R) return 0.0;
    return 2.0 * M_PI * M_PI *
           integrate([&](double r) { return phi_eval(pair, kind, r) * std::sinh(r); }, M_PI * t, R,
                     std::min(quad_tolerance(), 1e-11));
  }
  const double sigma = std::sinh(M_PI * t);
  const double smax = std::sinh(0.5 * R);
  if (sigma >= smax) return 0.0;
  const double W = std::sqrt(smax * smax - sigma * sigma);
  const double sg2 = sigma * sigma;
  auto f = [&](double w) {
    const double r = 2.0 * std::asinh(std::sqrt(w * w + sg2));
    return phi_eval(pair, ArchPlaceKind::Real, r);
  };
  return 8.0 * M_PI * integrate(f, 0.0, W, std::min(quad_tolerance(), 1e-10));
}

// Trace threshold: any gamma in SL2 with tr(gamma gamma^*) at or above this
// has phi(gamma) = 0.
inline double support_cutoff(const TestFunctionPair& pair, ArchPlaceKind kind) {
  return 2.0 * std::cosh(2.0 * M_PI * pair.support_radius / (1 + place_epsilon(kind)));
}

}  // namespace tracebound

#pragma once

// Special functions needed by the archimedean and zeta machinery: complex
// log-gamma (Lanczos), digamma, and Hurwitz/Riemann zeta with s-derivatives
// by Euler-Maclaurin summation. Accuracy target ~1e-12 for |Im s| up to a few
// hundred, which covers every evaluation this project performs.

#include <cmath>
#include <complex>
#include <stdexcept>

namespace tracebound {

inline constexpr double kEulerGamma = 0.5772156649015328606065120900824024;

using cplx = std::complex<double>;

// Lanczos approximation, g = 7, 9 terms. Valid for Re z > 0.5; reflection
// handles the rest.
inline cplx log_gamma(cplx z) {
  static const double g = 7.0;
  static const double c[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) {
    // log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
    const cplx s = std::sin(M_PI * z);
    if (std::abs(s) == 0.0) throw std::domain_error("log_gamma: pole");
    return std::log(M_PI) - std::log(s) - log_gamma(1.0 - z);
  }
  z -= 1.0;
  cplx x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + double(i));
  const cplx t = z + g + 0.5;
  return 0.918938533204672741780329736406 /* log sqrt(2 pi) */
         + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

// Digamma by recurrence into the asymptotic region.
inline cplx digamma(cplx z) {
  if (z.real() <= 0.0 && std::abs(z - std::round(z.real())) < 1e-14 && std::abs(z.imag()) < 1e-14)
    throw std::domain_error("digamma: pole");
  cplx acc = 0.0;
  while (z.real() < 12.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  static const double b[7] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6};
  const cplx inv = 1.0 / z, inv2 = inv * inv;
  cplx r = std::log(z) - 0.5 * inv;
  cplx p = inv2;
  for (int n = 0; n < 7; ++n) {
    r -= b[n] / (2.0 * (n + 1)) * p;
    p *= inv2;
  }
  return acc + r;
}

inline double digamma(double x) { return digamma(cplx(x, 0.0)).real(); }

namespace em {

// Bernoulli numbers B_2 .. B_24.
inline constexpr double bern[12] = {
    1.0 / 6,        -1.0 / 30,       1.0 / 42,      -1.0 / 30,
    5.0 / 66,       -691.0 / 2730,   7.0 / 6,       -3617.0 / 510,
    43867.0 / 798,  -174611.0 / 330, 854513.0 / 138, -236364091.0 / 2730};

}  // namespace em

// Hurwitz zeta(s, a) for a > 0 and Re s > -1 (s != 1), with optional
// s-derivative, by Euler-Maclaurin. Returns {zeta, d/ds zeta}.
inline std::pair<cplx, cplx> hurwitz_zeta_with_deriv(cplx s, double a) {
  if (std::abs(s - 1.0) < 1e-14) throw std::domain_error("hurwitz_zeta: pole at s=1");
  const int N = std::max(32, int(1.6 * std::abs(s.imag())) + 24);
  const int M = 12;
  cplx z = 0.0, dz = 0.0;
  for (int k = 0; k < N; ++k) {
    const double x = k + a;
    const double lx = std::log(x);
    const cplx t = std::exp(-s * lx);
    z += t;
    dz += -lx * t;
  }
  const double X = N + a;
  const double lX = std::log(X);
  const cplx Xms = std::exp(-s * lX);
  // tail: X^{1-s}/(s-1)
  const cplx tail = Xms * X / (s - 1.0);
  z += tail;
  dz += tail * (-lX - 1.0 / (s - 1.0));
  // + X^{-s}/2
  z += 0.5 * Xms;
  dz += -0.5 * lX * Xms;
  // Bernoulli corrections: sum_j B_2j/(2j)! * (s)_{2j-1} * X^{-s-2j+1}
  cplx poch = s;           // (s)_1
  cplx dpoch = 1.0;        // d/ds (s)_1
  double fact = 2.0;       // (2j)!
  double Xp = 1.0 / X;     // X^{-(2j-1)}
  for (int j = 1; j <= M; ++j) {
    const cplx term = em::bern[j - 1] / fact * poch * Xms * Xp;
    z += term;
    dz += em::bern[j - 1] / fact * (dpoch * Xms - poch * lX * Xms) * Xp;
    // advance (s)_{2j-1} -> (s)_{2j+1}
    const cplx f1 = s + double(2 * j - 1), f2 = s + double(2 * j);
    dpoch = dpoch * f1 * f2 + poch * (f1 + f2);
    poch *= f1 * f2;
    fact *= (2 * j + 1) * (2 * j + 2);
    Xp /= X * X;
  }
  return {z, dz};
}

inline cplx hurwitz_zeta(cplx s, double a) { return hurwitz_zeta_with_deriv(s, a).first; }

inline cplx riemann_zeta(cplx s) { return hurwitz_zeta(s, 1.0); }
inline cplx riemann_zeta_prime(cplx s) { return hurwitz_zeta_with_deriv(s, 1.0).second; }

}  // namespace tracebound

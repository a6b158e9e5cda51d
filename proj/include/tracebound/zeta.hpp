#pragma once

// Dedekind zeta machinery for Q and quadratic fields: Laurent data at s = 1,
// the completed zeta function and its logarithmic derivative (pushed to
// Re s >= 1 by the functional equation), the Eisenstein integrand, and the
// residual-term limit. Class numbers come from brute-force reduced-form
// counting, fundamental units from a Pell search.

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "numfield.hpp"
#include "special.hpp"

namespace tracebound {

namespace detail {

// Class number of the quadratic field of fundamental discriminant D < 0 by
// counting reduced positive definite forms (a, b, c).
inline long long class_number_imaginary(long long D) {
  long long h = 0;
  const long long absD = -D;
  for (long long b = (absD % 2 == 0) ? 0 : 1; b * b <= absD / 3; b += 2) {
    const long long ac4 = b * b + absD;
    if (ac4 % 4) continue;
    const long long ac = ac4 / 4;
    for (long long a = std::max(b, 1LL); a * a <= ac; ++a) {
      if (ac % a) continue;
      const long long c = ac / a;
      if (a == b || a == c)
        ++h;  // b in [0, a]; the ambiguous boundary forms count once
      else
        h += (b == 0) ? 1 : 2;  // +-b both reduced when |b| < a < c
    }
  }
  return h;
}

// Class number of the real quadratic field of fundamental discriminant D > 0:
// count cycles of reduced indefinite forms (narrow class number), then divide
// by 2 when the fundamental unit has norm +1.
inline long long class_number_real(const NumberFieldDescriptor& F) {
  const long long D = F.discriminant;
  const double sq = std::sqrt((double)D);
  auto reduced = [&](long long a, long long b) {
    // reduced iff |sqrt(D) - 2|a|| < b < sqrt(D)
    return b > 0 && b < sq && std::abs(sq - 2.0 * std::llabs(a)) < double(b);
  };
  struct Form {
    long long a, b, c;
    bool operator==(const Form&) const = default;
  };
  std::vector<Form> forms;
  for (long long b = 1; b < (long long)sq + 1; ++b) {
    if ((D - b * b) % 4) continue;
    const long long ac = (b * b - D) / 4;  // negative
    for (long long a = -(long long)sq - 1; a <= (long long)sq + 1; ++a) {
      if (a == 0 || ac % a) continue;
      const long long c = ac / a;
      if (reduced(a, b)) forms.push_back({a, b, c});
    }
  }
  // rho-step: (a,b,c) -> (c, r, (r^2-D)/(4c)) with r = -b mod 2c, reduced range
  auto rho = [&](Form f) {
    const long long c2 = 2 * std::llabs(f.c);
    long long r = ((-f.b) % c2 + c2) % c2;
    while (r + c2 < sq) r += c2;
    while (r > sq) r -= c2;
    if (r <= 0) r += c2;
    return Form{f.c, r, (r * r - D) / (4 * f.c)};
  };
  std::vector<char> seen(forms.size(), 0);
  long long cycles = 0;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    Form f = forms[i];
    for (std::size_t guard = 0; guard < 4 * forms.size() + 8; ++guard) {
      f = rho(f);
      const auto it = std::find(forms.begin(), forms.end(), f);
      if (it == forms.end()) break;  // landed outside the table; cycle closed numerically
      const std::size_t j = std::size_t(it - forms.begin());
      if (seen[j]) break;
      seen[j] = 1;
    }
  }
  const FieldElement eps = fundamental_unit(F);
  const long long neps = fe_norm(F, eps);
  return neps == -1 ? cycles : cycles / 2;
}

}  // namespace detail

class ZetaBundle {
 public:
  explicit ZetaBundle(NumberFieldDescriptor field) : F_(field) {
    if (F_.kind == FieldKind::Quadratic) {
      chi_mod_ = std::llabs(F_.discriminant);
      chi_.resize(chi_mod_);
      for (long long a = 0; a < chi_mod_; ++a) chi_[a] = kronecker_symbol(F_.discriminant, a);
    }
    lambda_m1_ = compute_lambda_m1();
    compute_laurent_constants();
  }

  const NumberFieldDescriptor& field() const { return F_; }

  // Dedekind zeta and its derivative, Re s > 0, s != 1.
  cplx zeta(cplx s) const {
    auto [z, dz] = zeta_with_deriv(s);
    return z;
  }

  // Laurent data at s = 1: zeta_F(s) = lambda_{-1}/(s-1) + lambda_0 + ...
  double lambda_minus1() const { return lambda_m1_; }
  double lambda0() const { return lambda0_; }

  long long class_number() const {
    if (F_.kind == FieldKind::Rational) return 1;
    if (std::llabs(F_.discriminant) > 10'000)
      throw std::runtime_error("class_number: brute-force cap |disc| <= 1e4");
    return F_.quad_d < 0 ? detail::class_number_imaginary(F_.discriminant)
                         : detail::class_number_real(F_);
  }

  // Completed zeta Lambda_F(s), Re s > 0 away from the poles 0, 1.
  cplx completed_zeta(cplx s) const {
    const double absD = std::abs((double)F_.discriminant);
    cplx lg = 0.5 * s * std::log(absD);
    lg += double(F_.r1) * (-0.5 * s * std::log(M_PI) + log_gamma(0.5 * s));
    lg += double(F_.r2) * (std::log(2.0) - s * std::log(2.0 * M_PI) + log_gamma(s));
    return std::exp(lg) * zeta(s);
  }

  // Lambda'/Lambda(s). Uses the functional equation Lambda(s) = Lambda(1-s)
  // to push evaluation to Re >= 1/2 where the Dirichlet series machinery is
  // comfortable.
  cplx completed_log_deriv(cplx s) const {
    if (s.real() < 0.5) return -completed_log_deriv(1.0 - s);
    return completed_log_deriv_direct(s);
  }

  // Lambda'/Lambda(s) without the reflection; needs Re s > 0 and distance
  // from the pole at s = 1. Used as the independent route in tests.
  cplx completed_log_deriv_direct(cplx s) const {
    const double absD = std::abs((double)F_.discriminant);
    auto [z, dz] = zeta_with_deriv(s);
    cplx r = 0.5 * std::log(absD);
    r += double(F_.r1) * (-0.5 * std::log(M_PI) + 0.5 * digamma(0.5 * s));
    r += double(F_.r2) * (-std::log(2.0 * M_PI) + digamma(s));
    return r + dz / z;
  }

  // w(s) = Lambda'/Lambda(s) + 1/(s-1), regular at s = 1; evaluated on
  // Re s = 1 with the zeta pole cancelled analytically.
  cplx regularized_log_deriv_at_1(cplx u) const {
    // argument s = 1 + u
    const double absD = std::abs((double)F_.discriminant);
    cplx r = 0.5 * std::log(absD);
    r += double(F_.r1) * (-0.5 * std::log(M_PI) + 0.5 * digamma(0.5 * (1.0 + u)));
    r += double(F_.r2) * (-std::log(2.0 * M_PI) + digamma(1.0 + u));
    if (std::abs(u) < 1e-4) {
      // zeta'/zeta(1+u) + 1/u = lambda0/lambda_{-1} + (2 lambda1/lambda_{-1} - (lambda0/lambda_{-1})^2) u + O(u^2)
      const double c0 = lambda0_ / lambda_m1_;
      const double c1 = 2.0 * lambda1_ / lambda_m1_ - c0 * c0;
      return r + c0 + c1 * u;
    }
    auto [z, dz] = zeta_with_deriv(1.0 + u);
    return r + (dz * u + z) / (z * u);
  }

  // Eisenstein integrand factor Lambda'/Lambda(2it) - Lambda'/Lambda(1+2it),
  // real-valued and regular at t = 0.
  double eisenstein_integrand_factor(double t) const {
    const cplx w = regularized_log_deriv_at_1(cplx(0.0, 2.0 * t));
    return -2.0 * w.real();
  }

  // lim_{s -> 0} Lambda(2s)/Lambda(2s+1), by Richardson extrapolation through
  // the functional equation Lambda(2s) = Lambda(1-2s).
  double residual_limit() const {
    auto r = [&](double h) {
      const cplx num = completed_zeta(cplx(1.0 - 2.0 * h, 0.0));
      const cplx den = completed_zeta(cplx(1.0 + 2.0 * h, 0.0));
      return (num / den).real();
    };
    const double r1 = r(4e-3), r2 = r(2e-3), r3 = r(1e-3);
    const double e1 = 2.0 * r2 - r1, e2 = 2.0 * r3 - r2;
    return (4.0 * e2 - e1) / 3.0;
  }

  // Certified-by-sampling linear envelope |Lambda'/Lambda(2it) -
  // Lambda'/Lambda(1+2it)| <= C1 + C2 |t|, fitted on t in [0, 50] with 5%
  // headroom.
  std::pair<double, double> eisenstein_envelope() const {
    std::call_once(env_once_, [&] {
      double c2 = 0.0;
      std::vector<double> ts, vs;
      for (double t = 0.0; t <= 50.0 + 1e-9; t += 0.1) {
        ts.push_back(t);
        vs.push_back(std::abs(eisenstein_integrand_factor(t)));
      }
      for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] >= 10.0 + 0.05) c2 = std::max(c2, (vs[i] - vs[100]) / (ts[i] - 10.0));
      c2 = std::max(c2, 0.01);
      double c1 = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) c1 = std::max(c1, vs[i] - c2 * ts[i]);
      env_c1_ = 1.05 * c1;
      env_c2_ = 1.05 * c2;
      // verify the envelope on the sample grid
      for (std::size_t i = 0; i < ts.size(); ++i)
        if (vs[i] > env_c1_ + env_c2_ * ts[i])
          throw std::runtime_error("eisenstein_envelope: fit failed");
    });
    return {env_c1_, env_c2_};
  }

  // zeta_F and d/ds zeta_F in one pass. The Euler-Maclaurin tail keeps this
  // accurate a little past the critical strip, which the direct-route oracle
  // on Re s = 0 relies on.
  std::pair<cplx, cplx> zeta_with_deriv(cplx s) const {
    if (s.real() < -0.5) throw std::domain_error("zeta: need Re s > -1/2");
    if (std::abs(s - 1.0) < 1e-9) throw std::domain_error("zeta: pole at s = 1");
    auto [z, dz] = hurwitz_zeta_with_deriv(s, 1.0);
    if (F_.kind == FieldKind::Rational) return {z, dz};
    auto [l, dl] = dirichlet_l_with_deriv(s);
    return {z * l, dz * l + z * dl};
  }

  // L(s, chi_D) and derivative via the Hurwitz decomposition. At s = 1 the
  // Hurwitz poles cancel against sum chi(a) = 0, leaving the digamma formula
  // L(1, chi) = -(1/q) sum chi(a) psi(a/q); the derivative there is taken by
  // a central difference.
  std::pair<cplx, cplx> dirichlet_l_with_deriv(cplx s) const {
    const double q = double(chi_mod_);
    const double lq = std::log(q);
    if (std::abs(s - 1.0) < 1e-12) {
      cplx val = 0.0;
      for (long long a = 1; a <= chi_mod_; ++a) {
        if (chi_[a % chi_mod_] == 0) continue;
        val -= double(chi_[a % chi_mod_]) * digamma(cplx(double(a) / q, 0.0));
      }
      val /= q;
      const double h = 1e-5;
      const cplx dl = (dirichlet_l_with_deriv(s + h).first - dirichlet_l_with_deriv(s - h).first) / (2.0 * h);
      return {val, dl};
    }
    cplx sum = 0.0, dsum = 0.0;
    for (long long a = 1; a <= chi_mod_; ++a) {
      if (chi_[a % chi_mod_] == 0) continue;
      auto [h, dh] = hurwitz_zeta_with_deriv(s, double(a) / q);
      sum += double(chi_[a % chi_mod_]) * h;
      dsum += double(chi_[a % chi_mod_]) * dh;
    }
    const cplx qs = std::exp(-s * lq);
    return {qs * sum, qs * (dsum - lq * sum)};
  }

 private:
  double compute_lambda_m1() const {
    if (F_.kind == FieldKind::Rational) return 1.0;
    // class number formula for the residue of zeta_F = zeta * L(chi):
    // L(1, chi) = 2 pi h / (w sqrt|D|)  (D < 0),  2 h log(eps) / sqrt(D)  (D > 0)
    if (std::llabs(F_.discriminant) <= 10'000) {
      const double h = double(F_.quad_d < 0 ? detail::class_number_imaginary(F_.discriminant)
                                            : detail::class_number_real(F_));
      if (F_.quad_d < 0)
        return 2.0 * M_PI * h / (double(F_.roots_of_unity) * std::sqrt((double)-F_.discriminant));
      const FieldElement eps = fundamental_unit(F_);
      const double reg = std::log(std::abs(fe_embeddings(F_, eps)[0].real()));
      return 2.0 * h * reg / std::sqrt((double)F_.discriminant);
    }
    // fallback: numerical L(1, chi)
    return dirichlet_l_with_deriv(cplx(1.0, 0.0)).first.real();
  }

  void compute_laurent_constants() {
    auto f = [&](double h) { return zeta(cplx(1.0 + h, 0.0)).real() - lambda_m1_ / h; };
    auto sym = [&](double h) { return 0.5 * (f(h) + f(-h)); };
    // lambda0: even error expansion in h, two Richardson levels on h^2
    const double s1 = sym(1e-2), s2 = sym(5e-3), s3 = sym(2.5e-3);
    const double r1 = (4.0 * s2 - s1) / 3.0, r2 = (4.0 * s3 - s2) / 3.0;
    lambda0_ = (16.0 * r2 - r1) / 15.0;
    auto g = [&](double h) { return (f(h) - lambda0_) / h; };
    auto gsym = [&](double h) { return 0.5 * (g(h) + g(-h)); };
    const double t1 = gsym(1e-2), t2 = gsym(5e-3);
    lambda1_ = (4.0 * t2 - t1) / 3.0;
  }

  NumberFieldDescriptor F_;
  long long chi_mod_ = 1;
  std::vector<int> chi_;
  double lambda_m1_ = 1.0, lambda0_ = 0.0, lambda1_ = 0.0;
  mutable std::once_flag env_once_;
  mutable double env_c1_ = 0.0, env_c2_ = 0.0;
};

}  // namespace tracebound

#pragma once

// Quick invariant suites behind the `selftest` CLI verb. Each check prints
// one pass/fail line; a suite returns false when any check fails.

#include <cstdio>
#include <functional>
#include <string>

#include "arch_orbital.hpp"
#include "assembler.hpp"
#include "local_orbital.hpp"
#include "testfn.hpp"

namespace tracebound::selftest {

struct Runner {
  bool ok = true;
  void check(const std::string& name, bool pass) {
    std::printf("%-58s %s\n", name.c_str(), pass ? "PASS" : "FAIL");
    if (!pass) ok = false;
  }
};

inline bool transforms() {
  Runner r;
  const TestFunctionPair p = build_base_pair(1.0, 1e-3);
  r.check("hhat(0) = 1", std::abs(p.hhat(0.0) - 1.0) < 1e-12);
  r.check("hhat vanishes outside the support", p.hhat(1.5 * p.support_radius) == 0.0);
  bool pos = true;
  for (int j = 0; j <= 40; ++j) {
    const double x = 0.5 * j / 40.0;
    if (h_eval(p, {0.0, x}) < h_eval(p, 0.0) - 1e-9) pos = false;
  }
  r.check("h(ix) >= h(0) on [0, 1/2]", pos);
  double worst = 0.0;
  for (int k : {0, 1}) {
    const ArchPlaceKind kind = k ? ArchPlaceKind::Complex : ArchPlaceKind::Real;
    for (int j = 0; j <= 12; ++j) {
      const double t = 1.2 * p.support_radius * j / 12.0;
      worst = std::max(worst, std::abs(phi_to_hhat(p, kind, t) - p.hhat(t)));
    }
  }
  r.check("round trip |phi_to_hhat - hhat| <= 1e-6", worst <= 1e-6);
  return r.ok;
}

inline bool local() {
  Runner r;
  bool stab = true;
  for (long long pr : {3, 5, 7}) {
    for (long long m = 0; m < pr && stab; ++m)
      for (long long u = 0; u < pr && stab; ++u) {
        if ((m * m - 4 * u) % pr == 0) continue;
        const long long base = count_congruence_roots(pr, 1, m, u);
        for (int alpha = 2; alpha <= 4; ++alpha)
          if (count_congruence_roots(pr, alpha, m, u) != base) stab = false;
      }
  }
  r.check("root-count stabilization (f = 0)", stab);
  bool dom = true;
  for (long long pr : {2, 3, 5, 7, 11}) {
    for (int e = 0; e <= 3; ++e)
      for (long long m = 0; m < 6; ++m) {
        const long long u = 1;
        if ((m * m - 4 * u) == 0) continue;
        if (elliptic_local(pr, e, m, u, OrbitalMode::ExactSeries) >
            elliptic_local(pr, e, m, u, OrbitalMode::Bound) + 1e-12)
          dom = false;
      }
  }
  r.check("exact series <= closed bound", dom);
  bool gv = true;
  for (double q : {2.0, 3.0, 5.0, 7.0})
    for (int e = 0; e <= 6; ++e) {
      if (std::abs(parabolic_local_factor(q, e, 1.0, false)) > parabolic_g1_bound(q, e) + 1e-12) gv = false;
      if (std::abs(parabolic_local_factor(q, e, 1.0, true)) > parabolic_g1_prime_bound(q, e) + 1e-12) gv = false;
    }
  r.check("|g_v(1)| and |g_v'(1)| bounds", gv);
  return r.ok;
}

inline bool arch() {
  Runner r;
  const TestFunctionPair p = build_base_pair(1.0, 1e-3);
  const double id_real = identity_contribution({p}, {ArchPlaceKind::Real});
  r.check("identity factor matches phi(I_2) at a real place",
          std::abs(id_real - phi_eval(p, ArchPlaceKind::Real, 0.0)) < 1e-6);
  const double zr = arch_parabolic(p, ArchPlaceKind::Real, false);
  const double zc = arch_parabolic(p, ArchPlaceKind::Complex, false);
  r.check("Z_v(1) pinned constants", std::abs(zr - 1.0 / (4.0 * M_PI)) < 1e-14 &&
                                          std::abs(zc - 1.0 / (M_PI * M_PI)) < 1e-14);
  const auto ir = arch_intertwining(ArchPlaceKind::Real, 0.5);
  const auto ic = arch_intertwining(ArchPlaceKind::Complex, 0.5);
  r.check("intertwining scalars at s = 1/2 equal pi",
          std::abs(ir - std::complex<double>(M_PI, 0)) < 1e-10 &&
              std::abs(ic - std::complex<double>(M_PI, 0)) < 1e-10);
  const auto F = make_rational_field();
  const ZetaBundle& zeta = cached_zeta_bundle(F);
  r.check("residual limit close to -1", std::abs(zeta.residual_limit() + 1.0) < 1e-4);
  return r.ok;
}

inline int run(const std::string& which) {
  bool ok = true;
  if (which == "transforms" || which == "all") ok = transforms() && ok;
  if (which == "local" || which == "all") ok = local() && ok;
  if (which == "arch" || which == "all") ok = arch() && ok;
  return ok ? 0 : 2;
}

}  // namespace tracebound::selftest

#include <doctest.h>

#include <cmath>

#include "tracebound/testfn.hpp"

using namespace tracebound;

namespace {

const TestFunctionPair& pair_default() {
  static const TestFunctionPair p = build_base_pair(1.0, 5e-4);
  return p;
}

// Independent Simpson rule over the frozen sample grid, used as the oracle
// for integrals of hhat.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("base pair satisfies the normalization and support conditions") {
  const auto& p = pair_default();
  CHECK(p.hhat(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.hhat(1.5 * p.support_radius) == 0.0);
  CHECK(p.hhat(-1.5 * p.support_radius) == 0.0);
  CHECK(p.support_radius <= 1.0 + 1e-15);
  CHECK(p.positivity_scale > 0.0);
  CHECK(p.positivity_scale <= 1.0);
  // evenness and nonnegativity of hhat on a grid
  for (int j = 0; j <= 50; ++j) {
    const double x = p.support_radius * j / 50.0;
    CHECK(p.hhat(x) == doctest::Approx(p.hhat(-x)).epsilon(1e-13));
    CHECK(p.hhat(x) >= 0.0);
  }
}

TEST_CASE("h at i/4 is positive, via independent quadrature of hhat e^{pi x/2}") {
  const auto& p = pair_default();
  const double oracle =
      simpson([&](double x) { return p.hhat(x) * std::exp(M_PI * x / 2.0); }, -p.support_radius,
              p.support_radius, 4000);
  CHECK(oracle > 0.0);
  CHECK(h_eval(p, {0.0, 0.25}) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("h_eval basics: h(0) equals the integral of hhat, evenness, positivity at i/2") {
  const auto& p = pair_default();
  const double oracle = simpson([&](double x) { return p.hhat(x); }, -p.support_radius, p.support_radius, 4000);
  CHECK(h_eval(p, 0.0) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(h_eval(p, 0.37) == doctest::Approx(h_eval(p, -0.37)).epsilon(1e-10));
  CHECK(h_eval(p, {0.0, 0.5}) >= h_eval(p, 0.0));
  CHECK_THROWS_AS(h_eval(p, {0.3, 0.2}), std::domain_error);
  CHECK_THROWS_AS(h_eval(p, {0.0, 0.7}), std::domain_error);
}

TEST_CASE("scale_pair: identity, value scaling, support scaling") {
  const auto& p = pair_default();
  const auto p1 = scale_pair(p, 1.0);
  CHECK(p1.support_radius == doctest::Approx(p.support_radius));
  CHECK(h_eval(p1, 0.0) == doctest::Approx(h_eval(p, 0.0)).epsilon(1e-12));
  const auto p2 = scale_pair(p, 2.0);
  CHECK(h_eval(p2, 0.0) == doctest::Approx(0.5 * h_eval(p, 0.0)).epsilon(1e-12));
  CHECK(p2.support_radius == doctest::Approx(0.5 * p.support_radius));
  for (const double t : {0.5, 2.0, 10.0}) {
    const auto pt = scale_pair(p, t);
    for (const double z : {0.1, 0.45})
      CHECK(h_eval(pt, z) == doctest::Approx(h_eval(p, z / t) / t).epsilon(1e-10));
    const double zi = 0.45 * std::min(1.0, t);  // keep both sides on the allowed imaginary segment
    CHECK(h_eval(pt, {0.0, zi}) == doctest::Approx(h_eval(p, {0.0, zi / t}) / t).epsilon(1e-10));
  }
}

TEST_CASE("phi vanishes past the trace cutoff and at the complex support edge") {
  const auto& p = pair_default();
  CHECK(phi_eval(p, ArchPlaceKind::Real, 2.0 * M_PI * p.support_radius * 1.01) == 0.0);
  CHECK(phi_eval(p, ArchPlaceKind::Complex, M_PI * p.support_radius * 1.01) == 0.0);
  CHECK(phi_eval(p, ArchPlaceKind::Complex, M_PI * p.support_radius) == doctest::Approx(0.0).epsilon(1e-12));
  // the default bump normalizes the support radius to exactly 1, so the real
  // trace threshold is the classical 2 cosh(2 pi) = 535.49...
  CHECK(p.support_radius == doctest::Approx(1.0));
  CHECK(support_cutoff(p, ArchPlaceKind::Real) == doctest::Approx(535.4935229674963).epsilon(1e-10));
  CHECK(support_cutoff(p, ArchPlaceKind::Complex) ==
        doctest::Approx(2.0 * std::cosh(M_PI * p.support_radius)));
  // the threshold degenerates to 2 as the support shrinks
  CHECK(support_cutoff(scale_pair(p, 1e6), ArchPlaceKind::Real) == doctest::Approx(2.0));
}

TEST_CASE("phi at the identity equals the plancherel integral at a real place") {
  const auto& p = pair_default();
  // (1/4pi) int x h(x) tanh(pi x) dx with h through h_eval on a grid
  const double T = 30.0;
  const double oracle = simpson(
                            [&](double x) {
                              return x * h_eval(p, x) * std::tanh(M_PI * x);
                            },
                            0.0, T, 3000) /
                        (2.0 * M_PI);
  CHECK(phi_eval(p, ArchPlaceKind::Real, 0.0) == doctest::Approx(oracle).epsilon(2e-6));
}

TEST_CASE("round trip recovers hhat at sampled points, both kinds") {
  const auto& p = pair_default();
  for (const auto kind : {ArchPlaceKind::Real, ArchPlaceKind::Complex}) {
    CHECK(phi_to_hhat(p, kind, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(phi_to_hhat(p, kind, 1.1 * p.support_radius) == doctest::Approx(0.0).epsilon(1e-9));
    for (int j = 1; j <= 10; ++j) {
      const double t = p.support_radius * j / 10.0;
      CHECK(phi_to_hhat(p, kind, t) == doctest::Approx(p.hhat(t)).epsilon(1e-5).scale(1.0));
    }
  }
  // the transforms commute with rescaling, so scaled pairs round-trip too
  for (const double s : {0.5, 2.0}) {
    const auto ps = scale_pair(p, s);
    for (const auto kind : {ArchPlaceKind::Real, ArchPlaceKind::Complex})
      for (int j = 0; j <= 5; ++j) {
        const double t = ps.support_radius * (0.1 + 0.8 * j / 5.0);
        CHECK(std::abs(phi_to_hhat(ps, kind, t) - ps.hhat(t)) < 1e-6);
      }
  }
}

TEST_CASE("substitution identity: the inner kernel integrates to 2 pi") {
  // int_{2 pi t}^{2 pi x} sinh r / (sqrt(sinh^2(r/2) - sinh^2(pi t))
  //                                sqrt(sinh^2(pi x) - sinh^2(r/2))) dr = 2 pi,
  // evaluated by splitting at the midpoint and desingularizing each half.
  auto check_pair = [](double t, double x) {
    const double st = std::sinh(M_PI * t), sx = std::sinh(M_PI * x);
    const double mid = M_PI * (t + x);  // midpoint of [2 pi t, 2 pi x]
    const double smid = std::sinh(0.5 * mid);
    const double um = std::sqrt(smid * smid - st * st);
    const double vm = std::sqrt(sx * sx - smid * smid);
    const double left = 4.0 * integrate(
                                  [&](double u) {
                                    const double s2 = u * u + st * st;
                                    return 1.0 / std::sqrt(sx * sx - s2);
                                  },
                                  0.0, um, 1e-11);
    const double right = 4.0 * integrate(
                                   [&](double v) {
                                     const double s2 = sx * sx - v * v;
                                     return 1.0 / std::sqrt(s2 - st * st);
                                   },
                                   0.0, vm, 1e-11);
    return left + right;
  };
  for (auto [t, x] : {std::pair{0.05, 0.3}, std::pair{0.2, 0.9}, std::pair{0.4, 0.5}})
    CHECK(check_pair(t, x) == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
}

TEST_CASE("plancherel tanh identity") {
  for (const double x : {0.25, 1.0, 2.0}) {
    const double v = integrate([&](double t) { return std::sin(2.0 * M_PI * x * t) / std::sinh(M_PI * t); },
                               1e-12, 30.0, 1e-12);
    CHECK(v == doctest::Approx(0.5 * std::tanh(M_PI * x)).epsilon(1e-8));
  }
}

TEST_CASE("defective grids are rejected") {
  CHECK_THROWS_AS(build_base_pair(1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_base_pair(-1.0, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(scale_pair(pair_default(), 0.0), std::invalid_argument);
}

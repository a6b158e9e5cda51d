#include <doctest.h>

#include <cmath>

#include "tracebound/quadrature.hpp"
#include "tracebound/special.hpp"

using namespace tracebound;

TEST_CASE("adaptive quadrature on smooth and kinked integrands") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, 0.0, 10.0, 1e-12) ==
        doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-12));
  // integrable endpoint behavior after the usual u^2 substitution
  CHECK(integrate([](double u) { return 2.0; }, 0.0, 1.0, 1e-12) == doctest::Approx(2.0));
}

TEST_CASE("gauss-legendre fixed rule") {
  const double v = integrate_gl([](double x) { return x * x * x * x; }, -1.0, 1.0, 16);
  CHECK(v == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("log gamma and digamma against classical values") {
  CHECK(std::abs(gamma_fn(cplx(0.5, 0.0)) - cplx(std::sqrt(M_PI), 0.0)) < 1e-12);
  CHECK(std::abs(gamma_fn(cplx(5.0, 0.0)) - cplx(24.0, 0.0)) < 1e-10);
  CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-kEulerGamma - 2.0 * std::log(2.0)).epsilon(1e-12));
  // reflection-free series check: psi(1+ix) real part at x = 1
  double s = 0.0;
  for (long long k = 1; k <= 2'000'000; ++k) s += 1.0 / (k * (k * k + 1.0));
  CHECK(digamma(cplx(1.0, 1.0)).real() == doctest::Approx(-kEulerGamma + s).epsilon(1e-9));
}

TEST_CASE("riemann zeta by euler-maclaurin") {
  CHECK(riemann_zeta(cplx(2.0, 0.0)).real() == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
  CHECK(riemann_zeta(cplx(4.0, 0.0)).real() == doctest::Approx(std::pow(M_PI, 4) / 90.0).epsilon(1e-12));
  // zeta'(2) = zeta(2) (gamma + ln 2pi - 12 ln A), A the Glaisher constant
  const double glaisher = 1.2824271291006226369;
  const double expected = M_PI * M_PI / 6.0 * (kEulerGamma + std::log(2.0 * M_PI) - 12.0 * std::log(glaisher));
  CHECK(riemann_zeta_prime(cplx(2.0, 0.0)).real() == doctest::Approx(expected).epsilon(1e-10));
}

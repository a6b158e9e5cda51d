#include <doctest.h>

#include <numeric>
#include <set>

#include "tracebound/numfield.hpp"

using namespace tracebound;

namespace {

// Independent index oracle: the Gamma_0(N) cosets in SL2(Z/N) biject with
// P^1(Z/N); count pairs (c, d) with gcd(c, d, N) = 1 and divide by phi(N).
long long p1_size(long long N) {
  if (N == 1) return 1;
  long long count = 0;
  for (long long c = 0; c < N; ++c)
    for (long long d = 0; d < N; ++d)
      if (std::gcd(std::gcd(c, d), N) == 1) ++count;
  long long phi = 0;
  for (long long a = 0; a < N; ++a)
    if (std::gcd(a, N) == 1) ++phi;
  return count / phi;
}

// Brute-force splitting of p in the quadratic order: count roots of the
// minimal polynomial of omega mod p.
SplitType brute_split(const NumberFieldDescriptor& F, long long p) {
  const long long c1 = F.omega_half ? -1 : 0;
  const long long c0 = F.omega_half ? -((F.quad_d - 1) / 4) : -F.quad_d;
  int roots = 0;
  bool dbl = false;
  for (long long x = 0; x < p; ++x) {
    if ((x * x + c1 * x + c0) % p == 0) {
      ++roots;
      if (((2 * x + c1) % p + p) % p == 0) dbl = true;
    }
  }
  if (dbl) return SplitType::Ramified;
  return roots == 2 ? SplitType::Split : SplitType::Inert;
}

}  // namespace

TEST_CASE("field descriptors") {
  const auto Q = make_rational_field();
  CHECK(Q.degree == 1);
  CHECK(Q.r1 == 1);
  CHECK(Q.r2 == 0);
  CHECK(Q.discriminant == 1);
  CHECK(Q.roots_of_unity == 2);

  const auto gauss = make_quadratic_field(-1);
  CHECK(gauss.discriminant == -4);
  CHECK(gauss.roots_of_unity == 4);
  CHECK(gauss.r2 == 1);

  const auto f5 = make_quadratic_field(5);
  CHECK(f5.discriminant == 5);
  CHECK(f5.r1 == 2);
  CHECK(f5.omega_half);

  CHECK_THROWS_AS(make_quadratic_field(12), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic_field(1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic_field(0), std::invalid_argument);
}

TEST_CASE("ideal factorization and the Gamma_0 index") {
  const auto Q = make_rational_field();
  CHECK(factor_ideal(Q, 12).gamma0_index == 24);
  CHECK(factor_ideal(Q, 1).gamma0_index == 1);
  CHECK(factor_ideal(Q, 1).a_j() == 1.0);
  for (long long p : {2, 3, 5, 13, 97}) CHECK(factor_ideal(Q, p).gamma0_index == p + 1);
  CHECK_THROWS_AS(factor_ideal(Q, 0), std::invalid_argument);

  // multiplicativity over coprime generators
  CHECK(factor_ideal(Q, 35).gamma0_index ==
        factor_ideal(Q, 5).gamma0_index * factor_ideal(Q, 7).gamma0_index);
  const auto gauss = make_quadratic_field(-1);
  CHECK(factor_ideal(gauss, 15).gamma0_index ==
        factor_ideal(gauss, 3).gamma0_index * factor_ideal(gauss, 5).gamma0_index);

  // quadratic splitting shapes: split 5 = two places, inert 3 = one place of
  // residue cardinality 9, ramified 2 = one place with doubled exponent
  const auto j5 = factor_ideal(gauss, 5);
  CHECK(j5.factors.size() == 2);
  CHECK(j5.gamma0_index == 36);
  const auto j3 = factor_ideal(gauss, 3);
  CHECK(j3.factors.size() == 1);
  CHECK(j3.factors[0].place.q == 9);
  CHECK(j3.gamma0_index == 10);
  const auto j2 = factor_ideal(gauss, 2);
  CHECK(j2.factors.size() == 1);
  CHECK(j2.factors[0].e == 2);
  CHECK(j2.gamma0_index == 2 * 3);
  CHECK(j2.norm == 4);
}

TEST_CASE("index oracle against P^1 counting") {
  const auto Q = make_rational_field();
  for (long long N = 1; N <= 600; ++N)
    CHECK(factor_ideal(Q, N).gamma0_index == p1_size(N));
  for (long long N : {841, 1024, 1729, 2310, 3125, 4000})
    CHECK(factor_ideal(Q, N).gamma0_index == p1_size(N));
}

TEST_CASE("splitting consistency against brute-force factorization, p < 500") {
  for (long long d : {-1, -3, -7, 5, 13, -11}) {
    const auto F = make_quadratic_field(d);
    for (long long p = 2; p < 500; ++p) {
      bool prime = p > 1;
      for (long long q = 2; q * q <= p; ++q)
        if (p % q == 0) prime = false;
      if (!prime) continue;
      CHECK(splitting_type(F, p) == brute_split(F, p));
    }
  }
}

TEST_CASE("unit square classes") {
  CHECK(unit_square_classes(make_rational_field()) ==
        std::vector<FieldElement>{{1, 0}, {-1, 0}});
  CHECK(unit_square_classes(make_quadratic_field(-1)) ==
        std::vector<FieldElement>{{1, 0}, {0, 1}});
  CHECK(unit_square_classes(make_quadratic_field(-7)) ==
        std::vector<FieldElement>{{1, 0}, {-1, 0}});
  const auto f5 = make_quadratic_field(5);
  const auto classes = unit_square_classes(f5);
  CHECK(classes.size() == 4);
  // the fundamental unit of Q(sqrt 5) is the golden ratio (1+sqrt5)/2 = omega
  CHECK(classes[2] == FieldElement{0, 1});
  CHECK(std::llabs(fe_norm(f5, classes[2])) == 1);
}

TEST_CASE("bounded element enumeration") {
  const auto Q = make_rational_field();
  const auto ints = enumerate_bounded_elements(Q, {3.5});
  CHECK(ints.size() == 7);
  const auto gauss = make_quadratic_field(-1);
  const auto disk = enumerate_bounded_elements(gauss, {1.0});
  CHECK(disk.size() == 5);  // 0, +-1, +-i
  // closure under negation and membership of 0
  for (long long d : {-1, -3, 5}) {
    const auto F = make_quadratic_field(d);
    std::vector<double> M(F.num_arch_places(), 4.7);
    const auto els = enumerate_bounded_elements(F, M);
    std::set<std::pair<long long, long long>> seen;
    for (const auto& e : els) seen.insert({e.a, e.b});
    CHECK(seen.count({0, 0}) == 1);
    for (const auto& e : els) CHECK(seen.count({-e.a, -e.b}) == 1);
    // degree-driven count bound
    double prod = 1.0;
    for (auto kind : F.arch_kinds()) prod *= std::pow(4.7 + 1.0, 1 + place_epsilon(kind));
    CHECK(double(els.size()) <= F.degree * std::pow(2.0 * prod, F.degree));
  }
  CHECK_THROWS_AS(enumerate_bounded_elements(Q, {1e9}), std::length_error);
}

TEST_CASE("fixed vector dimension bounds") {
  const auto Q = make_rational_field();
  CHECK(fixed_vector_dim_bound(Q, factor_ideal(Q, 1)).exact_product == 2);
  CHECK(fixed_vector_dim_bound(Q, factor_ideal(Q, 7)).exact_product == 4);
  const auto gauss = make_quadratic_field(-1);
  const auto dims = fixed_vector_dim_bound(gauss, factor_ideal(gauss, 5));  // split
  CHECK(dims.exact_product == (1 << gauss.r1) * 4);
  for (long long n : {1, 2, 6, 12, 36}) {
    const auto d = fixed_vector_dim_bound(Q, factor_ideal(Q, n));
    CHECK(d.exact_product <= d.divisor_bound);
  }
}

namespace {

// Brute-force root count of t^2 - m t + u over the residue field O_F/p for an
// inert prime, using field arithmetic on coset representatives a + b omega.
int brute_inert_roots(const NumberFieldDescriptor& F, long long p, FieldElement m, FieldElement u) {
  int count = 0;
  for (long long a = 0; a < p; ++a)
    for (long long b = 0; b < p; ++b) {
      const FieldElement t{a, b};
      const FieldElement val = fe_add(fe_sub(fe_mul(F, t, t), fe_mul(F, m, t)), u);
      const long long ra = ((val.a % p) + p) % p, rb = ((val.b % p) + p) % p;
      if (ra == 0 && rb == 0) ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("inert-place root counts match residue-field brute force") {
  const auto gauss = make_quadratic_field(-1);
  const PrimePlaceData i3{3, 9, 2, SplitType::Inert, 0};
  const PrimePlaceData i7{7, 49, 2, SplitType::Inert, 0};
  for (long long ma = -2; ma <= 2; ++ma)
    for (long long mb = -2; mb <= 2; ++mb)
      for (long long ua = -2; ua <= 2; ++ua)
        for (long long ub = -2; ub <= 2; ++ub) {
          const FieldElement m{ma, mb}, u{ua, ub};
          const FieldElement D = fe_sub(fe_mul(gauss, m, m), {4 * ua, 4 * ub});
          // only the unramified-discriminant counts are consumed
          if (std::llabs(fe_norm(gauss, D)) % 3 != 0)
            CHECK(residue_root_count(gauss, i3, m, u) == brute_inert_roots(gauss, 3, m, u));
          if (std::llabs(fe_norm(gauss, D)) % 7 != 0)
            CHECK(residue_root_count(gauss, i7, m, u) == brute_inert_roots(gauss, 7, m, u));
        }
  // characteristic-two residue field F_4 (2 is inert in Q(sqrt 5))
  const auto f5 = make_quadratic_field(5);
  const PrimePlaceData i2{2, 4, 2, SplitType::Inert, 0};
  for (long long ma = 0; ma <= 1; ++ma)
    for (long long mb = 0; mb <= 1; ++mb)
      for (long long ua = 0; ua <= 1; ++ua)
        for (long long ub = 0; ub <= 1; ++ub)
          CHECK(residue_root_count(f5, i2, {ma, mb}, {ua, ub}) ==
                brute_inert_roots(f5, 2, {ma, mb}, {ua, ub}));
}

TEST_CASE("square detection in the ring of integers") {
  const auto gauss = make_quadratic_field(-1);
  for (long long a = -6; a <= 6; ++a)
    for (long long b = -6; b <= 6; ++b) {
      const FieldElement x{a, b};
      FieldElement root;
      CHECK(fe_is_square(gauss, fe_mul(gauss, x, x), &root));
      CHECK(fe_mul(gauss, root, root) == fe_mul(gauss, x, x));
    }
  CHECK_FALSE(fe_is_square(gauss, {0, 1}));   // i is not a square in Z[i]
  CHECK_FALSE(fe_is_square(gauss, {3, 0}));
  const auto f5 = make_quadratic_field(5);
  const FieldElement omega{0, 1};
  CHECK(fe_is_square(f5, fe_mul(f5, omega, omega)));
  CHECK_FALSE(fe_is_square(f5, {-1, 0}));     // totally real field, -1 not a square
}

TEST_CASE("valuations and residue root counts at places") {
  const auto Q = make_rational_field();
  const PrimePlaceData p5{5, 5, 1, SplitType::Split, 0};
  CHECK(place_valuation(Q, p5, {50, 0}) == 2);
  CHECK(residue_root_count(Q, p5, {0, 0}, {1, 0}) == 2);  // t^2 + 1 mod 5

  const auto gauss = make_quadratic_field(-1);
  // 5 = (2+i)(2-i): val at one split place of 2+i is 1, at the other 0
  const PrimePlaceData s0{5, 5, 1, SplitType::Split, 0}, s1{5, 5, 1, SplitType::Split, 1};
  const FieldElement z{2, 1};
  const int v0 = place_valuation(gauss, s0, z), v1 = place_valuation(gauss, s1, z);
  CHECK(v0 + v1 == 1);
  // deeper split valuation through the Hensel lift: (2+i)^3 = 2 + 11i
  const FieldElement z3{2, 11};
  CHECK(place_valuation(gauss, s0, z3) + place_valuation(gauss, s1, z3) == 3);
  CHECK(std::max(place_valuation(gauss, s0, z3), place_valuation(gauss, s1, z3)) == 3);
  // and the two split places see conjugate elements with swapped valuations
  CHECK(place_valuation(gauss, s0, z3) == place_valuation(gauss, s1, {2, -11}));
  // inert place: val is half the norm valuation
  const PrimePlaceData i3{3, 9, 2, SplitType::Inert, 0};
  CHECK(place_valuation(gauss, i3, {3, 0}) == 1);
  CHECK(place_valuation(gauss, i3, {1, 1}) == 0);
  // ramified place of Q(sqrt 2): val_v(2) = 2, val_v(sqrt 2) = 1
  const auto f2 = make_quadratic_field(2);
  const PrimePlaceData r2{2, 2, 1, SplitType::Ramified, 0};
  CHECK(place_valuation(f2, r2, {2, 0}) == 2);
  CHECK(place_valuation(f2, r2, {0, 1}) == 1);
}

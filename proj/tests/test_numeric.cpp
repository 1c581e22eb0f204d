#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mf/errors.hpp"
#include "mf/padic.hpp"
#include "mf/rational.hpp"

using namespace mf;

TEST_CASE("rational helpers") {
  CHECK(rat(4, -6) == Rational(-2, 3));
  CHECK(rat_parse("3/4") == rat(3, 4));
  CHECK(rat_parse("-7") == rat(-7, 1));
  CHECK(rat_str(rat(-2, 3)) == "-2/3");
  CHECK(rat_str(rat(5, 1)) == "5");
  CHECK_THROWS_AS(rat_parse("1/0"), MfError);
  CHECK_THROWS_AS(rat_parse("abc"), MfError);
  CHECK(rat_val(rat(18, 5), 3) == 2);
  CHECK(rat_val(rat(5, 27), 3) == -3);
  CHECK(rat_pow(rat(2, 3), -2) == rat(9, 4));
  CHECK_THROWS_AS(rat_val(Rational(0), 3), MfError);
}

TEST_CASE("padic additive identity with exact zero") {
  PadicNum x = PadicNum::from_unit(3, 2, 1, 10);
  PadicNum z = PadicNum::exact_zero(3, 10);
  PadicNum s = x + z;
  CHECK(s.val() == 2);
  CHECK(s.residue(3) == 9);
  CHECK(s.prec() == 10);
}

TEST_CASE("padic valuation additivity") {
  PadicNum x = PadicNum::from_unit(5, 1, 2, 8);
  PadicNum y = PadicNum::from_unit(5, 2, 3, 8);
  PadicNum p = x * y;
  CHECK(p.val() == 3);
  // units known mod 5^7 and 5^6, so the product is known mod 5^(3+6) = 5^9
  CHECK(p.prec() == 9);
  CHECK((p / PadicNum::from_rational(rat_pow(5, 3), 5, 8)).residue(1) == 6 % 5);
  CHECK(PadicNum::agree(p, PadicNum::from_rational(6 * rat_pow(5, 3), 5, 12), p.prec()));
}

TEST_CASE("padic product against exact rational oracle") {
  // (1+3+3^2+...) = 1/(1-3) = -1/2 and (1-3) = -2; oracle: product of the
  // exact rationals 4 and -2, reduced mod 3^6
  PadicNum a = PadicNum::from_rational(4, 3, 6);
  PadicNum b = PadicNum::from_rational(-2, 3, 6);
  PadicNum prod = a * b;
  PadicNum oracle = PadicNum::from_rational(-8, 3, 6);
  CHECK(PadicNum::agree(prod, oracle, 6));
  CHECK(prod.residue(6) == Integer(3 * 3 * 3 * 3 * 3 * 3 - 8));
}

TEST_CASE("padic precision propagation") {
  PadicNum x = PadicNum::from_rational(rat(1, 2), 5, 10);
  PadicNum y = PadicNum::from_rational(rat(3, 4), 5, 6);
  CHECK((x + y).prec() == 6);
  CHECK((x * y).rel_prec() == 6);
  // cancellation drops to zero-to-precision
  PadicNum d = x - x;
  CHECK(d.is_zero_to_prec());
  CHECK(d.prec() == 10);
  // adding something below the noise floor of the cancellation stays fuzzy
  PadicNum tiny = PadicNum::from_rational(rat_pow(5, 12), 5, 20);
  CHECK((d + tiny).is_zero_to_prec());
  // negative valuation values still track relative precision
  PadicNum inv = PadicNum::from_rational(rat(1, 25), 5, 4);
  CHECK(inv.val() == -2);
  CHECK(inv.rel_prec() == 6);
  CHECK_THROWS_AS((void)PadicNum::agree(x, y, 8), MfError);
}

TEST_CASE("padic division errors") {
  PadicNum x = PadicNum::from_rational(7, 5, 8);
  CHECK_THROWS_AS(x / PadicNum::exact_zero(5, 8), MfError);
  CHECK_THROWS_AS(x / PadicNum::zero_to_prec(5, 8), MfError);
  try {
    x.div(PadicNum::exact_zero(5, 8));
  } catch (const MfError& e) {
    CHECK(e.kind == Err::DivisionByZero);
  }
  try {
    x.div(PadicNum::zero_to_prec(5, 8));
  } catch (const MfError& e) {
    CHECK(e.kind == Err::Indistinguishable);
  }
  PadicNum lowrel = PadicNum::from_unit(5, 7, 2, 8);  // one significant digit
  PadicNum other = PadicNum::from_unit(5, 0, 3, 8);
  CHECK((lowrel * other).rel_prec() == 1);
}

TEST_CASE("padic field axioms on random values") {
  std::mt19937 rng(171);
  std::uniform_int_distribution<long> num(-40, 40), den(1, 30);
  auto draw = [&] {
    Rational r;
    do {
      r = rat(num(rng), den(rng));
    } while (r == 0);
    return r;
  };
  for (long p : {3, 5, 7}) {
    for (int i = 0; i < 60; ++i) {
      Rational ra = draw(), rb = draw(), rc = draw();
      PadicNum a = PadicNum::from_rational(ra, p, 12);
      PadicNum b = PadicNum::from_rational(rb, p, 12);
      PadicNum c = PadicNum::from_rational(rc, p, 12);
      // (a+b)-b = a to the precision contract
      CHECK(PadicNum::agree((a + b) - b, a, 9));
      // commutativity / associativity at matched precision
      CHECK(PadicNum::agree(a * b, b * a, (a * b).prec()));
      CHECK(PadicNum::agree((a * b) * c, a * (b * c), std::min((a * (b * c)).prec(), ((a * b) * c).prec())));
      // exact-rational oracle for the full expression (a+b)*c
      PadicNum lhs = (a + b) * c;
      PadicNum oracle = PadicNum::from_rational((ra + rb) * rc, p, 12);
      if (!lhs.vanishes()) CHECK(PadicNum::agree(lhs, oracle, std::min(lhs.prec(), oracle.prec())));
      // pow vs repeated multiplication
      CHECK(PadicNum::agree(a.pow(3), a * a * a, (a * a * a).prec()));
      if (rat_val(ra, p) == 0) CHECK(PadicNum::agree(a.pow(-2) * a.pow(2), PadicNum::one(p, 12), 10));
    }
  }
}

TEST_CASE("hensel ordinary root: level-11 curve coefficient at p=3") {
  // a_3 = -1, c = 3; alpha is the unit root of X^2 + X + 3
  HenselRoots r = hensel_ordinary_root(-1, 3, 3, 8);
  CHECK(r.alpha.is_unit());
  CHECK(r.alpha.residue(1) == Integer(3 - 1));  // alpha = -1 mod 3
  // resubstitution: alpha^2 - a_p alpha + c = 0 mod 3^8
  PadicNum resub = r.alpha * r.alpha - PadicNum::from_rational(-1, 3, 8) * r.alpha +
                   PadicNum::from_rational(3, 3, 8);
  CHECK(resub.vanishes());
  CHECK(resub.prec() >= 8);
  CHECK(r.beta.val() == 1);
  CHECK(PadicNum::agree(r.alpha + r.beta, PadicNum::from_rational(-1, 3, 8), 8));
  CHECK(PadicNum::agree(r.alpha * r.beta, PadicNum::from_rational(3, 3, 8), 8));
}

TEST_CASE("hensel ordinary root: degenerate constant term") {
  HenselRoots r = hensel_ordinary_root(1, 0, 7, 6);
  CHECK(PadicNum::agree(r.alpha, PadicNum::one(7, 6), 6));
  CHECK(r.beta.is_exact_zero());
}

TEST_CASE("hensel ordinary root: resubstitution oracle a_p=2 c=p") {
  for (long p : {3, 5, 11}) {
    HenselRoots r = hensel_ordinary_root(2, Rational(p), p, 10);
    CHECK(PadicNum::agree(r.alpha + r.beta, PadicNum::from_rational(2, p, 10), 10));
    CHECK(PadicNum::agree(r.alpha * r.beta, PadicNum::from_rational(Rational(p), p, 10), 10));
    CHECK(r.alpha.is_unit());
    CHECK(r.beta.val() == 1);
  }
}

TEST_CASE("hensel ordinary root: rejects non-ordinary input") {
  CHECK_THROWS_AS(hensel_ordinary_root(3, 3, 3, 8), MfError);
  try {
    hensel_ordinary_root(5, 5, 5, 8);
  } catch (const MfError& e) {
    CHECK(e.kind == Err::NotOrdinary);
  }
  // rational a_p with negative valuation is equally non-ordinary input
  CHECK_THROWS_AS(hensel_ordinary_root(rat(1, 3), 3, 3, 8), MfError);
}

TEST_CASE("padic quad arithmetic over golden-ratio modulus") {
  // w with minimal polynomial X^2 - X - 1 (irreducible mod 3)
  long p = 3, N = 8, t = 1;
  Integer n = -1;
  auto mk = [&](const Rational& a, const Rational& b) {
    return PadicQuad(PadicNum::from_rational(a, p, N), PadicNum::from_rational(b, p, N), t, n);
  };
  PadicQuad w = mk(0, 1);
  // w^2 = w + 1
  CHECK(PadicQuad::agree(w * w, mk(1, 1), N));
  // norm(w) = -1, trace(w) = 1
  CHECK(PadicNum::agree(w.norm(), PadicNum::from_rational(-1, p, N), N));
  CHECK(PadicNum::agree(w.trace(), PadicNum::one(p, N), N));
  // conj is an involution and fixes the base field
  PadicQuad x = mk(rat(2, 5), rat(-3, 7));
  CHECK(PadicQuad::agree(x.conj().conj(), x, N));
  CHECK(mk(rat(2, 5), 0).conj().im().vanishes());
  // division round-trips
  PadicQuad y = mk(1, 2);
  CHECK(PadicQuad::agree((x / y) * y, x, 6));
  // multiplicativity of norm
  CHECK(PadicNum::agree((x * y).norm(), x.norm() * y.norm(), 6));
  // pow consistency
  CHECK(PadicQuad::agree(x.pow(4), x * x * x * x, 6));
  CHECK_THROWS_AS(x / mk(0, 0), MfError);
}

TEST_CASE("padic quad ring mismatch is rejected") {
  PadicQuad a(PadicNum::one(3, 6), PadicNum::one(3, 6), 1, Integer(-1));
  PadicQuad b(PadicNum::one(3, 6), PadicNum::one(3, 6), 0, Integer(-5));
  CHECK_THROWS_AS(a + b, MfError);
  PadicQuad c(PadicNum::one(5, 6), PadicNum::one(5, 6), 1, Integer(-1));
  CHECK_THROWS_AS(a * c, MfError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mf/errors.hpp"
#include "mf/mpoly.hpp"

using namespace mf;

namespace {

std::mt19937 rng(53);

Rational draw() {
  std::uniform_int_distribution<long> num(-6, 6), den(1, 5);
  return rat(num(rng), den(rng));
}

// independent univariate convolution: (1 - kappa T^2) * P(T) with P given by
// its coefficient list
std::vector<Rational> conv_with_1_minus_kT2(const std::vector<Rational>& p, const Rational& k) {
  std::vector<Rational> out(p.size() + 2, Rational(0));
  for (size_t i = 0; i < p.size(); ++i) {
    out[i] += p[i];
    out[i + 2] -= k * p[i];
  }
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

}  // namespace

TEST_CASE("gadget: zero parameters give the trivial decomposition") {
  Coeff z = Coeff(Rational(0));
  Gadget g = build_gadget(z, z, z, z);
  CHECK(g.P.monomials().size() == 1);
  CHECK(std::get<Rational>(g.P.coeff(0, 0)) == 1);
  CHECK(std::get<Rational>(g.P1.coeff(0, 0)) == 1);
  CHECK(g.P1.monomials().size() == 1);
  CHECK(std::get<Rational>(g.a2.coeff(0, 0)) == 1);
  CHECK(g.a2.monomials().size() == 1);
  CHECK(g.b1.is_structurally_zero());
  CHECK(check_linear_identity(g));
  CHECK(check_square_identity(g));
  CHECK(check_symmetric_factor(g));
}

TEST_CASE("gadget: unit parameters vanish at the unit point") {
  Coeff one = Coeff(Rational(1));
  Gadget g = build_gadget(one, one, one, one);
  CHECK(std::get<Rational>(g.a2.eval(one, one)) == 0);  // 2 - 1 - 2 + 1
  CHECK(std::get<Rational>(g.P.eval(one, one)) == 0);
  CHECK(check_linear_identity(g));
  CHECK(check_square_identity(g));
}

TEST_CASE("gadget: identities hold on 100 random rational draws") {
  for (int it = 0; it < 100; ++it) {
    Gadget g = build_gadget(Coeff(draw()), Coeff(draw()), Coeff(draw()), Coeff(draw()));
    CHECK(check_linear_identity(g));
    CHECK(check_square_identity(g));
    CHECK(check_symmetric_factor(g));
  }
}

TEST_CASE("gadget: the univariate factor matches an independent convolution") {
  for (int it = 0; it < 25; ++it) {
    Rational a1 = draw(), b1 = draw(), a2 = draw(), b2 = draw();
    Gadget g = build_gadget(Coeff(a1), Coeff(b1), Coeff(a2), Coeff(b2));
    std::vector<Coeff> got = symmetric_factor(g);
    std::vector<Rational> pu;
    for (const Coeff& c : g.P.diagonal_univariate()) pu.push_back(std::get<Rational>(c));
    std::vector<Rational> expect = conv_with_1_minus_kT2(pu, a1 * b1 * a2 * b2);
    REQUIRE(got.size() >= expect.size());
    for (size_t i = 0; i < got.size(); ++i) {
      Rational want = i < expect.size() ? expect[i] : Rational(0);
      CHECK(std::get<Rational>(got[i]) == want);
    }
  }
}

TEST_CASE("gadget: the leading quadratic factor uses both first-index roots") {
  // the alternative indexing (be2 in place of be1) fails whenever it differs
  int informative = 0;
  for (int it = 0; it < 40; ++it) {
    Rational a1 = draw(), b1 = draw(), a2 = draw(), b2 = draw();
    Gadget g = build_gadget(Coeff(a1), Coeff(b1), Coeff(a2), Coeff(b2));
    CHECK(check_symmetric_factor(g, false));
    if (a1 * b1 * a2 * b2 != a1 * b2 * a2 * b2 && a1 * a2 != 0 && g.P.deg1() == 4) {
      CHECK_FALSE(check_symmetric_factor(g, true));
      ++informative;
    }
  }
  CHECK(informative > 20);  // the draws actually separated the two forms
}

TEST_CASE("gadget: falsifiability via a perturbed constant term") {
  Gadget g = build_gadget(Coeff(rat(2)), Coeff(rat(-1, 3)), Coeff(rat(1, 2)), Coeff(rat(5)));
  CHECK(check_linear_identity(g));
  Gadget bad = g;
  bad.b1 = bad.b1.add(MPoly::constant(Coeff(Rational(1))));
  CHECK_FALSE(check_linear_identity(bad));
  Gadget bad2 = g;
  bad2.a2 = bad2.a2.add(MPoly::term(Coeff(rat(1, 7)), 1, 2));
  CHECK_FALSE(check_linear_identity(bad2));
}

TEST_CASE("gadget: index rule and degree bounds") {
  for (int it = 0; it < 10; ++it) {
    Gadget g = build_gadget(Coeff(draw()), Coeff(draw()), Coeff(draw()), Coeff(draw()));
    for (const auto& [k, c] : g.a2.monomials()) CHECK(k.first <= k.second);
    for (const auto& [k, c] : g.b1.monomials()) CHECK(k.first > k.second);
    for (const auto& [k, c] : g.a1.monomials()) CHECK(k.first >= k.second);
    for (const auto& [k, c] : g.b2.monomials()) CHECK(k.first < k.second);
    CHECK(g.a2.deg1() <= 2);
    CHECK(g.a2.deg2() <= 3);
    CHECK(g.b1.deg1() <= 4);
    CHECK(g.b1.deg2() <= 2);
  }
}

TEST_CASE("gadget: a1 a2 - b1 b2 is swap-symmetric") {
  for (int it = 0; it < 10; ++it) {
    Rational a1 = draw(), b1 = draw(), a2 = draw(), b2 = draw();
    Gadget g = build_gadget(Coeff(a1), Coeff(b1), Coeff(a2), Coeff(b2));
    Gadget h = build_gadget(Coeff(a2), Coeff(b2), Coeff(a1), Coeff(b1));
    MPoly Dg = g.a1.mul(g.a2).sub(g.b1.mul(g.b2));
    MPoly Dh = h.a1.mul(h.a2).sub(h.b1.mul(h.b2));
    // transpose Dh and compare
    MPoly Dht;
    for (const auto& [k, c] : Dh.monomials())
      Dht = Dht.add(MPoly::term(c, k.second, k.first));
    CHECK(Dg.sub(Dht).vanishes());
  }
}

TEST_CASE("gadget: p-adic instantiation") {
  long p = 7, N = 14;
  auto pd = [&](long num, long den) {
    return Coeff(PadicNum::from_rational(rat(num, den), p, N));
  };
  Gadget g = build_gadget(pd(3, 2), pd(-5, 1), pd(1, 3), pd(4, 5));
  CHECK(check_linear_identity(g));
  CHECK(check_square_identity(g));
  CHECK(check_symmetric_factor(g, false));
  CHECK_FALSE(check_symmetric_factor(g, true));
  // evaluation agrees with the exact-rational evaluation reduced p-adically
  Gadget gr = build_gadget(Coeff(rat(3, 2)), Coeff(rat(-5)), Coeff(rat(1, 3)), Coeff(rat(4, 5)));
  Coeff x1 = pd(2, 1), x2 = pd(-1, 3);
  Coeff lhs = g.P.eval(x1, x2);
  Rational exact = std::get<Rational>(gr.P.eval(Coeff(rat(2)), Coeff(rat(-1, 3))));
  CHECK(cagree(lhs, Coeff(PadicNum::from_rational(exact, p, N)), N - 2));
}

TEST_CASE("mpoly: ring sanity") {
  MPoly x = MPoly::term(Coeff(rat(2)), 1, 0).add(MPoly::constant(Coeff(rat(-1))));
  MPoly y = MPoly::term(Coeff(rat(1, 2)), 0, 1).add(MPoly::constant(Coeff(rat(3))));
  MPoly pr = x.mul(y);
  CHECK(std::get<Rational>(pr.coeff(1, 1)) == 1);
  CHECK(std::get<Rational>(pr.coeff(1, 0)) == 6);
  CHECK(std::get<Rational>(pr.coeff(0, 1)) == rat(-1, 2));
  CHECK(std::get<Rational>(pr.coeff(0, 0)) == -3);
  // cancellation prunes storage
  MPoly z = x.sub(x);
  CHECK(z.is_structurally_zero());
  // negative exponents rejected
  CHECK_THROWS_AS(MPoly::term(Coeff(rat(1)), -1, 0), MfError);
  // off-diagonal polynomials have no univariate form
  CHECK_THROWS_AS(x.diagonal_univariate(), MfError);
}

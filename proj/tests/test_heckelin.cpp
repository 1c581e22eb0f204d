#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mf/errors.hpp"
#include "mf/euler.hpp"
#include "mf/heckelin.hpp"

using namespace mf;

namespace {

Rational getr(const Coeff& c) { return std::get<Rational>(c); }

bool isp(long n) {
  if (n < 2) return false;
  for (long q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

// independent oracle: a_1..a_N of q prod_{n>=1} (1-q^n)^2 (1-q^{11n})^2 by
// direct truncated convolution; this is the weight-2 level-11 eigenform
std::vector<long> eta11_sq(long N) {
  std::vector<long> c(N, 0);
  c[0] = 1;
  auto mul1m = [&](long n) {  // multiply by (1 - q^n) in place
    for (long i = N - 1; i >= n; --i) c[i] -= c[i - n];
  };
  for (long n = 1; n < N; ++n) {
    mul1m(n);
    mul1m(n);
  }
  for (long n = 1; 11 * n < N; ++n) {
    mul1m(11 * n);
    mul1m(11 * n);
  }
  std::vector<long> a(N + 1, 0);
  for (long i = 0; i < N; ++i) a[i + 1] = c[i];
  return a;
}

// the level-11 eigen-table read off the eta oracle (primes up to `upto`)
EigenData table11(long upto) {
  std::vector<long> a = eta11_sq(upto);
  EigenData t;
  t.name = "f11";
  t.wt = WeightData::elliptic(2, 0);
  t.level = 11;
  for (long q = 2; q <= upto; ++q)
    if (isp(q)) {
      t.ap[std::to_string(q)] = Rational(a[q]);
      t.psi0[std::to_string(q)] = 1;
    }
  return t;
}

// deterministic synthetic eigen-table: small integer eigenvalues, trivial
// character, overridable at chosen primes
EigenData synth_table(const std::string& name, long seed, long upto) {
  EigenData t;
  t.name = name;
  t.wt = WeightData::elliptic(2, 0);
  t.level = 1;
  for (long q = 2; q <= upto; ++q)
    if (isp(q)) {
      t.ap[std::to_string(q)] = Rational(((q * 7 + seed) % 11) - 5);
      t.psi0[std::to_string(q)] = 1;
    }
  return t;
}

EigenData stab_table(const EigenData& base, long p, const Rational& ueig,
                     const std::string& name) {
  EigenData t = base;
  t.name = name;
  t.level = base.level * p;
  t.ap[std::to_string(p)] = ueig;
  return t;
}

Err kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const MfError& e) {
    return e.kind;
  }
  return Err::Internal;
}

}  // namespace

TEST_CASE("eigen expansion matches the eta-product oracle at level 11") {
  long N = 40;
  std::vector<long> a = eta11_sq(N);
  // the derived anchor values the ratio examples depend on
  CHECK(a[1] == 1);
  CHECK(a[2] == -2);
  CHECK(a[3] == -1);
  CHECK(a[11] == 1);
  EigenData t = table11(N);
  EllipticQExp f = eigen_expansion(t, N);
  // multiplicativity + the prime-power recursion reproduce every coefficient
  for (long n = 1; n <= N; ++n) CHECK(getr(f.at(n)) == a[n]);
  // missing prime fails loudly
  EigenData s = t;
  s.ap.erase("7");
  CHECK(kind_of([&] { eigen_expansion(s, N); }) == Err::MissingEigenvalue);
  CHECK_THROWS_AS(eigen_expansion(t, 0), MfError);
}

TEST_CASE("petersson ratios: recursion branches and guards") {
  EigenData t = table11(40);
  // base case and the two pinned examples
  CHECK(petersson_ratio(t, 1, 1, 33) == 1);
  CHECK(petersson_ratio(t, 1, 3, 33) == rat(-1, 4));  // a_3/(3+1)
  CHECK(petersson_ratio(t, 3, 3, 33) == 1);           // common shift cancels
  CHECK(petersson_ratio(t, 3, 1, 33) == rat(-1, 4));  // symmetry
  // prime dividing the level costs a_q/q instead of a_q/(q+1)
  CHECK(petersson_ratio(t, 1, 11, 121) == rat(1, 11));
  // multi-prime peeling on a synthetic level-one table
  EigenData u = synth_table("u", 1, 10);
  Rational a2 = u.eig("2"), a3 = u.eig("3");
  CHECK(petersson_ratio(u, 1, 6, 6) == a2 / 3 * (a3 / 4));
  CHECK(petersson_ratio(u, 2, 3, 6) == petersson_ratio(u, 1, 6, 6));
  // guards
  CHECK(kind_of([&] { petersson_ratio(t, 1, 2, 44); }) == Err::Schema);   // 44/11 = 4
  CHECK(kind_of([&] { petersson_ratio(t, 2, 1, 33); }) == Err::Schema);   // 2 does not divide 3
  CHECK(kind_of([&] { petersson_ratio(t, 1, 3, 11); }) == Err::Schema);   // 3 does not divide 1
  EigenData s = t;
  s.ap.erase("3");
  CHECK(kind_of([&] { petersson_ratio(s, 1, 3, 33); }) == Err::RecursionStuck);
}

TEST_CASE("gram ratio tables: symmetry and unit diagonal") {
  EigenData t = table11(40);
  GramRatios g = build_gram_ratios(t, 33);
  CHECK(g.divisors == std::vector<long>{1, 3});
  CHECK(g.at(1, 1) == 1);
  CHECK(g.at(1, 3) == rat(-1, 4));
  CHECK(g.at(3, 1) == rat(-1, 4));
  CHECK(g.at(3, 3) == 1);
  CHECK(kind_of([&] { g.at(1, 2); }) == Err::Schema);
  // synthetic multi-prime tables: full symmetry and all-ones diagonal
  for (long seed = 1; seed <= 5; ++seed) {
    EigenData u = synth_table("u", seed, 10);
    GramRatios gr = build_gram_ratios(u, 30);
    CHECK(gr.divisors.size() == 8);
    for (long d1 : gr.divisors)
      for (long d2 : gr.divisors) {
        CHECK(gr.at(d1, d2) == gr.at(d2, d1));
        if (d1 == d2) CHECK(gr.at(d1, d2) == 1);
      }
  }
  CHECK(kind_of([&] { build_gram_ratios(t, 23); }) == Err::Schema);  // not a multiple
}

TEST_CASE("isotypic projection on a three-system space") {
  long N = 60;
  EigenData ft = synth_table("f", 1, N);
  ft.ap["2"] = 3;
  ft.ap["3"] = 1;
  EigenData gt = synth_table("g", 4, N);
  gt.ap["2"] = -1;
  gt.ap["3"] = 4;
  EigenData ht = synth_table("h", 7, N);
  ht.ap["2"] = 5;
  ht.ap["3"] = -2;
  EllipticQExp f = eigen_expansion(ft, N), g = eigen_expansion(gt, N), h = eigen_expansion(ht, N);
  EigenBasis B;
  B.level = 1;
  B.systems = {ft, gt, ht};
  B.forms = {f, g, h};
  B.dist = {{{0, 1}, "2"}, {{0, 2}, "2"}, {{1, 2}, "3"}};
  CHECK(validate_eigen_basis(B));

  EllipticQExp v = ell_add(ell_sub(ell_scale(f, Coeff(rat(5))), ell_scale(g, Coeff(rat(2)))),
                           ell_scale(h, Coeff(rat(7))));
  EllipticQExp pf = isotypic_project(v, B, "f");
  CHECK(pf.trunc() == N);  // verified membership certifies the full window
  CHECK(ell_agree(pf, ell_scale(f, Coeff(rat(5))), 0));
  // idempotent, annihilates the complement, fixes its eigenvector
  CHECK(ell_agree(isotypic_project(pf, B, "f"), pf, 0));
  CHECK(ell_agree(isotypic_project(ell_scale(g, Coeff(rat(3))), B, "f"), ell_zero_like(f), 0));
  CHECK(ell_agree(isotypic_project(f, B, "f"), f, 0));
  // partition of the identity on the span
  EllipticQExp sum = ell_add(ell_add(pf, isotypic_project(v, B, "g")),
                             isotypic_project(v, B, "h"));
  CHECK(ell_agree(sum, v, 0));

  // a fourth eigen-system is flagged as outside the span
  EigenData ot = synth_table("o", 9, N);
  ot.ap["2"] = 2;
  ot.ap["3"] = 3;
  EllipticQExp outside = eigen_expansion(ot, N);
  CHECK(kind_of([&] { isotypic_project(ell_add(v, outside), B, "f"); }) == Err::NotInSpan);

  // a recorded prime that fails to separate is refused
  EigenBasis Bbad = B;
  Bbad.systems[0].ap["5"] = 1;
  Bbad.systems[1].ap["5"] = 1;
  Bbad.dist[{0, 1}] = "5";
  CHECK(kind_of([&] { isotypic_project(v, Bbad, "f"); }) == Err::IndistinguishableSystems);
  CHECK_FALSE(validate_eigen_basis(Bbad));
  EigenBasis Bmiss = B;
  Bmiss.dist.erase({1, 2});
  CHECK(kind_of([&] { isotypic_project(v, Bmiss, "g"); }) == Err::IndistinguishableSystems);
  CHECK(kind_of([&] { isotypic_project(v, B, "nope"); }) == Err::Schema);

  // falsifiability of the validator: corrupt one coefficient of one form
  EigenBasis Bcorr = B;
  EllipticQExp fc = f;
  fc.set(7, Coeff(rat(99)));
  Bcorr.forms[0] = fc;
  CHECK_FALSE(validate_eigen_basis(Bcorr));
  // level mismatch between system and space is structural
  EigenBasis Blev = B;
  Blev.level = 3;
  CHECK(kind_of([&] { validate_eigen_basis(Blev); }) == Err::Schema);
}

TEST_CASE("nearly-ordinary projection: eigen mode on stabilization spans") {
  long N = 96, p = 3;
  EigenData ft = synth_table("f", 1, N);
  ft.ap["2"] = 3;
  ft.ap["3"] = 5;
  ft.psi0["3"] = 2;  // alpha beta = 6 = p psi0(p): roots 2 (unit) and 3
  EigenData gt = synth_table("g", 4, N);
  gt.ap["2"] = -1;
  gt.ap["3"] = 7;
  gt.psi0["3"] = 2;  // roots 1 (unit) and 6
  EllipticQExp f = eigen_expansion(ft, N), g = eigen_expansion(gt, N);
  EllipticQExp fa = ell_stabilize(f, Coeff(rat(3)), p), fb = ell_stabilize(f, Coeff(rat(2)), p);
  EllipticQExp ga = ell_stabilize(g, Coeff(rat(6)), p), gb = ell_stabilize(g, Coeff(rat(1)), p);
  EigenBasis B;
  B.level = p;
  B.systems = {stab_table(ft, p, 2, "fa"), stab_table(ft, p, 3, "fb"),
               stab_table(gt, p, 1, "ga"), stab_table(gt, p, 6, "gb")};
  B.forms = {fa, fb, ga, gb};
  B.dist = {{{0, 1}, "3"}, {{0, 2}, "2"}, {{0, 3}, "2"},
            {{1, 2}, "2"}, {{1, 3}, "2"}, {{2, 3}, "3"}};
  // each stabilization really is a U0(p)-eigenvector at its recorded root
  CHECK(validate_eigen_basis(B));

  EllipticQExp v = ell_sub(ell_scale(fa, Coeff(rat(4))), ell_scale(fb, Coeff(rat(3))));
  EllipticQExp no = nearly_ordinary_project(v, B, p);
  CHECK(ell_agree(no, ell_scale(fa, Coeff(rat(4))), 0));
  // already ordinary input is fixed
  CHECK(ell_agree(nearly_ordinary_project(fa, B, p), fa, 0));
  // a span with no unit component projects to zero
  EigenBasis Bsub;
  Bsub.level = p;
  Bsub.systems = {B.systems[1], B.systems[3]};
  Bsub.forms = {fb, gb};
  Bsub.dist = {{{0, 1}, "3"}};
  EllipticQExp z = nearly_ordinary_project(ell_sub(fb, gb), Bsub, p);
  for (const auto& [n, c] : z.coeffs()) CHECK(cis_exact_zero(c));
  // guards
  EigenBasis Bneg = Bsub;
  Bneg.systems[0].ap["3"] = rat(1, 3);
  CHECK(kind_of([&] { nearly_ordinary_project(fb, Bneg, p); }) == Err::Schema);
  EigenBasis Bold;
  Bold.level = 1;
  Bold.systems = {ft, gt};
  Bold.forms = {f, g};
  Bold.dist = {{{0, 1}, "2"}};
  CHECK(kind_of([&] { nearly_ordinary_project(f, Bold, p); }) == Err::Schema);
}

TEST_CASE("nearly-ordinary projection: iteration mode converges at the documented rate") {
  long N = 96, p = 3, prec = 12;
  EigenData ft = synth_table("f", 1, N);
  ft.ap["2"] = 3;
  ft.ap["3"] = 5;
  ft.psi0["3"] = 2;
  EllipticQExp f = eigen_expansion(ft, N);
  EllipticQExp fa = ell_stabilize(f, Coeff(rat(3)), p), fb = ell_stabilize(f, Coeff(rat(2)), p);
  EigenBasis B;
  B.level = p;
  B.systems = {stab_table(ft, p, 2, "fa"), stab_table(ft, p, 3, "fb")};
  B.forms = {fa, fb};
  B.dist = {{{0, 1}, "3"}};
  EllipticQExp v = ell_promote(
      ell_add(ell_scale(fa, Coeff(rat(2))), fb), p, prec);
  EllipticQExp mA = nearly_ordinary_project(v, B, p);
  // budget k suppresses the subunit component by exactly k digits
  for (long k : {2L, 4L}) {
    EllipticQExp mB = nearly_ordinary_project(v, B, p, OrdinaryMode::Iterate, k);
    CHECK(ell_agree(mB, mA, k));
    CHECK_FALSE(ell_agree(mB, mA, k + 1));
  }
  // iteration needs a unique unit system and a positive budget
  CHECK(kind_of([&] { nearly_ordinary_project(v, B, p, OrdinaryMode::Iterate, 0); }) ==
        Err::Schema);
  EigenData gt = synth_table("g", 4, N);
  gt.ap["2"] = -1;
  gt.ap["3"] = 7;
  gt.psi0["3"] = 2;
  EllipticQExp g = eigen_expansion(gt, N);
  EigenBasis B4 = B;
  B4.systems.push_back(stab_table(gt, p, 1, "ga"));
  B4.forms.push_back(ell_stabilize(g, Coeff(rat(6)), p));
  B4.dist[{0, 2}] = "2";
  B4.dist[{1, 2}] = "2";
  CHECK(kind_of([&] { nearly_ordinary_project(v, B4, p, OrdinaryMode::Iterate, 2); }) ==
        Err::Schema);
}

TEST_CASE("stabilization factor law relating the two projections") {
  long N = 96, p = 3;
  EigenData ft = synth_table("f", 1, N);
  ft.ap["2"] = 3;
  ft.ap["3"] = 5;
  ft.psi0["3"] = 2;
  EigenData gt = synth_table("g", 4, N);
  gt.ap["2"] = -1;
  gt.ap["3"] = 7;
  gt.psi0["3"] = 2;
  EllipticQExp f = eigen_expansion(ft, N), g = eigen_expansion(gt, N);
  Rational al = 2, be = 3;  // the ordinary pair of f at p
  EllipticQExp fa = ell_stabilize(f, Coeff(be), p), fb = ell_stabilize(f, Coeff(al), p);
  EllipticQExp ga = ell_stabilize(g, Coeff(rat(6)), p), gb = ell_stabilize(g, Coeff(rat(1)), p);

  EigenBasis Bold;
  Bold.level = 1;
  Bold.systems = {ft, gt};
  Bold.forms = {f, g};
  Bold.dist = {{{0, 1}, "2"}};
  EigenBasis Bstab;
  Bstab.level = p;
  Bstab.systems = {stab_table(ft, p, 2, "fa"), stab_table(ft, p, 3, "fb"),
                   stab_table(gt, p, 1, "ga"), stab_table(gt, p, 6, "gb")};
  Bstab.forms = {fa, fb, ga, gb};
  Bstab.dist = {{{0, 1}, "3"}, {{0, 2}, "2"}, {{0, 3}, "2"},
                {{1, 2}, "2"}, {{1, 3}, "2"}, {{2, 3}, "3"}};

  EllipticQExp h = ell_sub(ell_scale(f, Coeff(rat(7))), ell_scale(g, Coeff(rat(5))));
  // left side: isotypic projection first, then ordinary stabilization
  EllipticQExp efh = isotypic_project(h, Bold, "f");
  CHECK(ell_agree(efh, ell_scale(f, Coeff(rat(7))), 0));
  EllipticQExp lhs = ell_stabilize(efh, Coeff(be), p);
  // right side: nearly-ordinary + isotypic on the stabilized span, times the
  // ratio-of-roots factor 1 - beta/alpha
  EllipticQExp h3 = h.with_level(p);
  EllipticQExp no = nearly_ordinary_project(h3, Bstab, p);
  CHECK(ell_agree(no, ell_add(ell_scale(fa, Coeff(rat(-14))), ga), 0));
  EllipticQExp efno = isotypic_project(no, Bstab, "fa");
  Coeff E = euler_adjoint(Coeff(al), Coeff(be));
  CHECK(getr(E) == rat(-1, 2));
  EllipticQExp rhs = ell_scale(efno, E);
  CHECK(ell_agree(lhs, rhs, 0));
}

TEST_CASE("span coordinates and the pairing quotient") {
  long N = 40;
  EigenData t = table11(N);
  EllipticQExp f = eigen_expansion(t, N);
  GramRatios gram = build_gram_ratios(t, 33);

  // the pinned example: twice the shifted form against the plain form
  EllipticQExp H = ell_scale(ell_plain_shift(f, 3, 1), Coeff(rat(2))).with_trunc(N);
  std::map<long, Coeff> hc = span_coordinates(H, f, gram.divisors);
  CHECK(getr(hc.at(1)) == 0);
  CHECK(getr(hc.at(3)) == 2);
  Coeff J = evaluate_J(H, {{1, Coeff(rat(1))}}, t, gram);
  CHECK(getr(J) == rat(-1, 2));
  // the plain form against itself, and a zero numerator
  CHECK(getr(evaluate_J(f, {{1, Coeff(rat(1))}}, t, gram)) == 1);
  CHECK(getr(evaluate_J(ell_zero_like(f), {{1, Coeff(rat(1))}}, t, gram)) == 0);
  // outside the recorded span: a shift index the divisor list does not carry
  EllipticQExp bad = ell_add(f, ell_plain_shift(f, 2, 1).with_trunc(N));
  CHECK(kind_of([&] { evaluate_J(bad, {{1, Coeff(rat(1))}}, t, gram); }) == Err::NotInSpan);
  // coordinate position beyond the certified window
  CHECK(kind_of([&] { span_coordinates(H.with_trunc(2), f, gram.divisors); }) ==
        Err::InsufficientTruncation);

  // composite divisors on a synthetic table, cross-checked by hand
  EigenData ut = synth_table("u", 1, N);
  EllipticQExp u = eigen_expansion(ut, N);
  GramRatios g6 = build_gram_ratios(ut, 6);
  CHECK(g6.divisors == std::vector<long>{1, 2, 3, 6});
  EllipticQExp H6 = ell_add(
      ell_sub(ell_scale(u, Coeff(rat(3))),
              ell_scale(ell_plain_shift(u, 2, 1), Coeff(rat(2)))),
      ell_scale(ell_plain_shift(ell_plain_shift(u, 2, 1), 3, 1), Coeff(rat(5))));
  std::map<long, Coeff> c6 = span_coordinates(H6, u, g6.divisors);
  CHECK(getr(c6.at(1)) == 3);
  CHECK(getr(c6.at(2)) == -2);
  CHECK(getr(c6.at(3)) == 0);
  CHECK(getr(c6.at(6)) == 5);
  std::map<long, Coeff> tv = {{2, Coeff(rat(1))}, {3, Coeff(rat(-1))}};
  Rational byhand = 0;
  for (const auto& [a, ca] : c6)
    for (const auto& [b, cb] : tv) byhand += getr(ca) * getr(cb) * g6.at(a, b);
  CHECK(getr(evaluate_J(H6, tv, ut, g6)) == byhand);

  // p-adic numerator against the exact value
  EllipticQExp Hp = ell_promote(H, 11, 10);
  Coeff Jp = evaluate_J(Hp, {{1, Coeff(rat(1))}}, t, gram, 8);
  CHECK(cagree(Jp, Coeff(PadicNum::from_rational(rat(-1, 2), 11, 10)), 8));
}

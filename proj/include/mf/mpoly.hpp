#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mf/coeff.hpp"

namespace mf {

// bivariate polynomial with coefficients in the shared coefficient ring.
// exact-zero coefficients are pruned on construction; p-adic zeros known only
// to finite precision are kept (they carry information).
class MPoly {
 public:
  using Key = std::pair<long, long>;  // (e1, e2) exponents of T1, T2

  MPoly() = default;
  static MPoly constant(Coeff c);
  static MPoly term(Coeff c, long e1, long e2);

  const std::map<Key, Coeff>& monomials() const { return c_; }
  Coeff coeff(long e1, long e2) const;  // exact 0 when absent
  bool is_structurally_zero() const { return c_.empty(); }
  bool vanishes() const;  // every stored coefficient vanishes (exactly or to precision)
  long deg1() const;
  long deg2() const;

  MPoly add(const MPoly& o) const;
  MPoly sub(const MPoly& o) const;
  MPoly mul(const MPoly& o) const;
  MPoly neg() const;
  MPoly scale(const Coeff& s) const;
  Coeff eval(const Coeff& x1, const Coeff& x2) const;

  // true iff every off-diagonal (e1 != e2) coefficient vanishes
  bool diagonal_supported() const;
  // univariate coefficient list c[k] = coeff of (T1 T2)^k; requires diagonal support
  std::vector<Coeff> diagonal_univariate() const;

  std::string str() const;

 private:
  std::map<Key, Coeff> c_;
  void put_(long e1, long e2, const Coeff& c);
};

// the seven polynomials of the V-operator decomposition trick, built from the
// four stabilization roots. P is a polynomial in the product T1 T2; P = a2 P1
// + b1 P2 = a1 P2 + b2 P1 splits it against either univariate factor, with
// the complementary piece indexed by which T-exponent dominates.
struct Gadget {
  Coeff al1, be1, al2, be2;
  MPoly P;            // prod over the four root pairs of (1 - r1 s2 T1 T2)
  MPoly P1, P2;       // (1 - alpha_i T_i)(1 - beta_i T_i)
  MPoly a1, a2, b1, b2;
};

Gadget build_gadget(const Coeff& al1, const Coeff& be1, const Coeff& al2, const Coeff& be2);

// P = a2 P1 + b1 P2 and P = a1 P2 + b2 P1, as polynomial identities
bool check_linear_identity(const Gadget& g);

// P^2 = (a1 a2 - b1 b2) P1 P2 + P (b2 P1 + b1 P2), plus diagonal support of
// a1 a2 - b1 b2 (it is secretly univariate in T1 T2)
bool check_square_identity(const Gadget& g);

// univariate coefficients of (a1 a2 - b1 b2)(T); requires diagonal support
std::vector<Coeff> symmetric_factor(const Gadget& g);

// does (a1 a2 - b1 b2)(T) equal (1 - kappa T^2) * P(T)? kappa is
// al1*be1*al2*be2 normally; alt_indexing tries al1*be2*al2*be2 instead. the
// two disagree generically, and exact expansion picks the true one.
bool check_symmetric_factor(const Gadget& g, bool alt_indexing = false);

}  // namespace mf

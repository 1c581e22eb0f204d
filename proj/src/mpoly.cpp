#include "mf/mpoly.hpp"

#include <sstream>

#include "mf/errors.hpp"

namespace mf {

void MPoly::put_(long e1, long e2, const Coeff& c) {
  if (cis_exact_zero(c)) return;
  c_[{e1, e2}] = c;
}

MPoly MPoly::constant(Coeff c) { return term(std::move(c), 0, 0); }

MPoly MPoly::term(Coeff c, long e1, long e2) {
  if (e1 < 0 || e2 < 0) fail(Err::Schema, "negative exponent in polynomial term");
  MPoly p;
  p.put_(e1, e2, c);
  return p;
}

Coeff MPoly::coeff(long e1, long e2) const {
  auto it = c_.find({e1, e2});
  return it == c_.end() ? Coeff(Rational(0)) : it->second;
}

bool MPoly::vanishes() const {
  for (const auto& [k, c] : c_)
    if (!cvanishes(c)) return false;
  return true;
}

long MPoly::deg1() const {
  long d = 0;
  for (const auto& [k, c] : c_) d = std::max(d, k.first);
  return d;
}

long MPoly::deg2() const {
  long d = 0;
  for (const auto& [k, c] : c_) d = std::max(d, k.second);
  return d;
}

MPoly MPoly::add(const MPoly& o) const {
  MPoly out = *this;
  for (const auto& [k, c] : o.c_) {
    auto it = out.c_.find(k);
    if (it == out.c_.end()) {
      out.put_(k.first, k.second, c);
    } else {
      Coeff s = cadd(it->second, c);
      if (cis_exact_zero(s))
        out.c_.erase(it);
      else
        it->second = s;
    }
  }
  return out;
}

MPoly MPoly::neg() const {
  MPoly out;
  for (const auto& [k, c] : c_) out.c_[k] = cneg(c);
  return out;
}

MPoly MPoly::sub(const MPoly& o) const { return add(o.neg()); }

MPoly MPoly::mul(const MPoly& o) const {
  MPoly out;
  for (const auto& [k1, c1] : c_)
    for (const auto& [k2, c2] : o.c_) {
      Key k{k1.first + k2.first, k1.second + k2.second};
      Coeff t = cmul(c1, c2);
      auto it = out.c_.find(k);
      if (it == out.c_.end()) {
        out.put_(k.first, k.second, t);
      } else {
        Coeff s = cadd(it->second, t);
        if (cis_exact_zero(s))
          out.c_.erase(it);
        else
          it->second = s;
      }
    }
  return out;
}

MPoly MPoly::scale(const Coeff& s) const {
  if (cis_exact_zero(s)) return MPoly();
  MPoly out;
  for (const auto& [k, c] : c_) out.put_(k.first, k.second, cmul(c, s));
  return out;
}

Coeff MPoly::eval(const Coeff& x1, const Coeff& x2) const {
  Coeff acc = Coeff(Rational(0));
  bool any = false;
  for (const auto& [k, c] : c_) {
    Coeff t = cmul(c, cmul(cpow(x1, k.first), cpow(x2, k.second)));
    acc = any ? cadd(acc, t) : t;
    any = true;
  }
  return acc;
}

bool MPoly::diagonal_supported() const {
  for (const auto& [k, c] : c_)
    if (k.first != k.second && !cvanishes(c)) return false;
  return true;
}

std::vector<Coeff> MPoly::diagonal_univariate() const {
  if (!diagonal_supported())
    fail(Err::Internal, "polynomial has off-diagonal support, no univariate form");
  long d = 0;
  for (const auto& [k, c] : c_)
    if (k.first == k.second) d = std::max(d, k.first);
  std::vector<Coeff> out(d + 1, Coeff(Rational(0)));
  for (const auto& [k, c] : c_)
    if (k.first == k.second) out[k.first] = c;
  return out;
}

std::string MPoly::str() const {
  if (c_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : c_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << cstr(c) << ")";
    if (k.first) os << "*T1^" << k.first;
    if (k.second) os << "*T2^" << k.second;
  }
  return os.str();
}

namespace {

// the two displayed complement polynomials. `swapped` exchanges the roles of
// the indices: parameters 1 <-> 2 and exponents transposed.
MPoly complement_a(const Coeff& al1, const Coeff& be1, const Coeff& al2, const Coeff& be2,
                   bool swapped) {
  const Coeff &A1 = swapped ? al2 : al1, &B1 = swapped ? be2 : be1;
  const Coeff &A2 = swapped ? al1 : al2, &B2 = swapped ? be1 : be2;
  auto t = [&](Coeff c, long e1, long e2) {
    return swapped ? MPoly::term(std::move(c), e2, e1) : MPoly::term(std::move(c), e1, e2);
  };
  Coeff p1 = cmul(A1, B1), p2 = cmul(A2, B2), s2 = cadd(A2, B2), s1 = cadd(A1, B1);
  MPoly out = t(cmul(cmul(p1, p2), s2), 2, 3);
  out = out.add(t(cneg(cmul(p1, p2)), 2, 2));
  out = out.add(t(cneg(cmul(p2, s1)), 1, 2));
  return out.add(t(Coeff(Rational(1)), 0, 0));
}

MPoly complement_b(const Coeff& al1, const Coeff& be1, const Coeff& al2, const Coeff& be2,
                   bool swapped) {
  const Coeff &A1 = swapped ? al2 : al1, &B1 = swapped ? be2 : be1;
  const Coeff &A2 = swapped ? al1 : al2, &B2 = swapped ? be1 : be2;
  auto t = [&](Coeff c, long e1, long e2) {
    return swapped ? MPoly::term(std::move(c), e2, e1) : MPoly::term(std::move(c), e1, e2);
  };
  Coeff p1 = cmul(A1, B1), p2 = cmul(A2, B2), s2 = cadd(A2, B2), s1 = cadd(A1, B1);
  MPoly out = t(cmul(cmul(p1, p1), p2), 4, 2);
  out = out.add(t(cneg(cmul(p1, s2)), 2, 1));
  out = out.add(t(cneg(p1), 2, 0));
  return out.add(t(s1, 1, 0));
}

MPoly univariate_pair(const Coeff& a, const Coeff& b, bool second) {
  // (1 - a T_i)(1 - b T_i)
  long e1 = second ? 0 : 1, e2 = second ? 1 : 0;
  MPoly one = MPoly::constant(Coeff(Rational(1)));
  MPoly fa = one.sub(MPoly::term(a, e1, e2));
  MPoly fb = one.sub(MPoly::term(b, e1, e2));
  return fa.mul(fb);
}

}  // namespace

Gadget build_gadget(const Coeff& al1, const Coeff& be1, const Coeff& al2, const Coeff& be2) {
  Gadget g;
  g.al1 = al1;
  g.be1 = be1;
  g.al2 = al2;
  g.be2 = be2;
  MPoly one = MPoly::constant(Coeff(Rational(1)));
  g.P = one;
  for (const Coeff& r : {al1, be1})
    for (const Coeff& s : {al2, be2}) g.P = g.P.mul(one.sub(MPoly::term(cmul(r, s), 1, 1)));
  g.P1 = univariate_pair(al1, be1, false);
  g.P2 = univariate_pair(al2, be2, true);
  g.a2 = complement_a(al1, be1, al2, be2, false);
  g.a1 = complement_a(al1, be1, al2, be2, true);
  g.b1 = complement_b(al1, be1, al2, be2, false);
  g.b2 = complement_b(al1, be1, al2, be2, true);
  return g;
}

bool check_linear_identity(const Gadget& g) {
  MPoly d1 = g.P.sub(g.a2.mul(g.P1).add(g.b1.mul(g.P2)));
  MPoly d2 = g.P.sub(g.a1.mul(g.P2).add(g.b2.mul(g.P1)));
  return d1.vanishes() && d2.vanishes();
}

bool check_square_identity(const Gadget& g) {
  MPoly D = g.a1.mul(g.a2).sub(g.b1.mul(g.b2));
  MPoly rhs = D.mul(g.P1).mul(g.P2).add(g.P.mul(g.b2.mul(g.P1).add(g.b1.mul(g.P2))));
  return g.P.mul(g.P).sub(rhs).vanishes() && D.diagonal_supported();
}

std::vector<Coeff> symmetric_factor(const Gadget& g) {
  return g.a1.mul(g.a2).sub(g.b1.mul(g.b2)).diagonal_univariate();
}

bool check_symmetric_factor(const Gadget& g, bool alt_indexing) {
  MPoly D = g.a1.mul(g.a2).sub(g.b1.mul(g.b2));
  Coeff kappa = alt_indexing ? cmul(cmul(g.al1, g.be2), cmul(g.al2, g.be2))
                             : cmul(cmul(g.al1, g.be1), cmul(g.al2, g.be2));
  MPoly cand = g.P.sub(g.P.mul(MPoly::term(kappa, 2, 2)));
  return D.sub(cand).vanishes();
}

}  // namespace mf

#pragma once
#include <string>
#include <variant>

#include "mf/padic.hpp"
#include "mf/rational.hpp"

namespace mf {

// coefficient ring: a closed set with explicit promotion Q -> Q_p -> Q_p(w);
// promotion needs the shape (prime, precision, extension modulus) of the
// other operand, so mixed arithmetic goes through the helpers below
using Coeff = std::variant<Rational, PadicNum, PadicQuad>;

inline bool cvanishes(const Coeff& c) {
  if (const auto* r = std::get_if<Rational>(&c)) return *r == 0;
  if (const auto* x = std::get_if<PadicNum>(&c)) return x->vanishes();
  return std::get<PadicQuad>(c).vanishes();
}

inline bool cis_exact_zero(const Coeff& c) {
  if (const auto* r = std::get_if<Rational>(&c)) return *r == 0;
  if (const auto* x = std::get_if<PadicNum>(&c)) return x->is_exact_zero();
  const PadicQuad& q = std::get<PadicQuad>(c);
  return q.re().is_exact_zero() && q.im().is_exact_zero();
}

// promote a rational to p-adic with enough precision that it never caps the
// precision of the value it meets (absolute and relative both covered)
PadicNum promote_rational(const Rational& r, const PadicNum& like);
PadicQuad promote_to_quad(const Coeff& c, const PadicQuad& like);

Coeff cadd(const Coeff& x, const Coeff& y);
Coeff cmul(const Coeff& x, const Coeff& y);
Coeff cdiv(const Coeff& x, const Coeff& y);
Coeff cneg(const Coeff& x);
inline Coeff csub(const Coeff& x, const Coeff& y) { return cadd(x, cneg(y)); }
Coeff cpow(const Coeff& x, long e);

// x == y mod p^k; exact comparison when both are rational
bool cagree(const Coeff& x, const Coeff& y, long k);

std::string cstr(const Coeff& c);

// variant index: 0 rational, 1 p-adic, 2 quadratic p-adic
inline int cring(const Coeff& c) { return static_cast<int>(c.index()); }

}  // namespace mf

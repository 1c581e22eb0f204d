#pragma once
#include <gmpxx.h>

#include <string>

#include "mf/errors.hpp"

namespace mf {

// exact rationals ride on GMP; mpq_class is always canonical (reduced, den>0)
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long n, long d = 1) {
  if (d == 0) fail(Err::DivisionByZero, "rational with zero denominator");
  Rational r(n, d);
  r.canonicalize();
  return r;
}

// parse "a/b" or "a"; exact, no floats anywhere
inline Rational rat_parse(const std::string& s) {
  if (s.empty()) fail(Err::Schema, "empty rational string");
  Rational r;
  if (r.set_str(s, 10) != 0) fail(Err::Schema, "bad rational string: " + s);
  if (r.get_den() == 0) fail(Err::Schema, "zero denominator: " + s);
  r.canonicalize();
  return r;
}

inline std::string rat_str(const Rational& r) { return r.get_str(); }

inline Integer int_pow(const Integer& b, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

// b^e for integer e (negative allowed when b nonzero)
inline Rational rat_pow(const Rational& b, long e) {
  if (e == 0) return Rational(1);
  bool neg = e < 0;
  unsigned long a = neg ? -(unsigned long)e : (unsigned long)e;
  Rational r(int_pow(b.get_num(), a), int_pow(b.get_den(), a));
  r.canonicalize();
  if (neg) {
    if (r == 0) fail(Err::DivisionByZero, "0 to a negative power");
    r = 1 / r;
  }
  return r;
}

// p-adic valuation of a nonzero rational; the caller handles zero
inline long rat_val(const Rational& x, long p) {
  if (x == 0) fail(Err::ZeroElement, "valuation of zero");
  long v = 0;
  Integer n = x.get_num(), d = x.get_den(), q, r;
  for (;;) {
    mpz_tdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), p);
    if (r != 0) break;
    n = q;
    ++v;
  }
  for (;;) {
    mpz_tdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), d.get_mpz_t(), p);
    if (r != 0) break;
    d = q;
    --v;
  }
  return v;
}

}  // namespace mf

#pragma once
#include <string>

#include "mf/rational.hpp"

namespace mf {

// Truncated p-adic number: value = p^val * unit, known mod p^prec (absolute).
// Three states: exact zero (valuation +inf, infinite precision), zero to
// precision (== 0 mod p^prec, unknown beyond), and nonzero with a unit part.
// Negative valuations are allowed; unit is reduced mod p^(prec-val).
class PadicNum {
 public:
  PadicNum() : p_(0) {}  // empty sentinel; any arithmetic on it is a bug

  static PadicNum exact_zero(long p, long prec);
  static PadicNum zero_to_prec(long p, long prec);
  static PadicNum from_rational(const Rational& r, long p, long prec);
  static PadicNum from_unit(long p, long val, Integer unit, long prec);
  static PadicNum one(long p, long prec) { return from_rational(1, p, prec); }

  long prime() const { return p_; }
  bool valid() const { return p_ != 0; }
  bool is_exact_zero() const { return state_ == St::Exact0; }
  bool is_zero_to_prec() const { return state_ == St::Zero2Prec; }
  bool vanishes() const { return state_ != St::NonZero; }  // not provably nonzero
  bool is_unit() const { return state_ == St::NonZero && val_ == 0; }

  long val() const;       // fails on exact zero (valuation +inf)
  long prec() const;      // absolute precision (huge sentinel for exact zero)
  long rel_prec() const;  // prec - val, the number of known unit digits

  PadicNum operator-() const;
  PadicNum add(const PadicNum& y) const;
  PadicNum sub(const PadicNum& y) const { return add(-y); }
  PadicNum mul(const PadicNum& y) const;
  PadicNum div(const PadicNum& y) const;
  PadicNum inv() const;
  PadicNum pow(long e) const;

  // drop to a lower absolute precision (no-op if already lower)
  PadicNum truncated(long new_prec) const;

  // canonical representative mod p^k (requires val >= 0 and prec >= k)
  Integer residue(long k) const;

  // x == y mod p^k; throws Indistinguishable when precision can't decide
  static bool agree(const PadicNum& x, const PadicNum& y, long k);

  std::string str() const;

 private:
  enum class St { Exact0, Zero2Prec, NonZero };
  long p_ = 0;
  St state_ = St::Exact0;
  long val_ = 0;   // meaningful for NonZero
  long prec_ = 0;  // absolute; for Exact0 kept as construction hint only
  Integer unit_;   // in [1, p^(prec-val)), coprime to p

  void normalize_();
  static void match_(const PadicNum& x, const PadicNum& y);
};

inline PadicNum operator+(const PadicNum& x, const PadicNum& y) { return x.add(y); }
inline PadicNum operator-(const PadicNum& x, const PadicNum& y) { return x.sub(y); }
inline PadicNum operator*(const PadicNum& x, const PadicNum& y) { return x.mul(y); }
inline PadicNum operator/(const PadicNum& x, const PadicNum& y) { return x.div(y); }

// a + b*w in the unramified quadratic extension of Q_p, where w has integral
// minimal polynomial X^2 - t X + n irreducible mod p. (t,n) come from the
// integral basis generator of the quadratic field being embedded.
class PadicQuad {
 public:
  PadicQuad() = default;
  PadicQuad(PadicNum a, PadicNum b, long t, Integer n);
  static PadicQuad from_base(const PadicNum& a, long t, Integer n);

  const PadicNum& re() const { return a_; }
  const PadicNum& im() const { return b_; }
  long gen_trace() const { return t_; }
  const Integer& gen_norm() const { return n_; }
  long prime() const { return a_.prime(); }

  bool vanishes() const { return a_.vanishes() && b_.vanishes(); }
  bool is_base() const { return b_.vanishes(); }
  long val() const;  // min of component valuations (unramified)

  PadicQuad operator-() const;
  PadicQuad add(const PadicQuad& y) const;
  PadicQuad sub(const PadicQuad& y) const { return add(-y); }
  PadicQuad mul(const PadicQuad& y) const;
  PadicQuad div(const PadicQuad& y) const;
  PadicQuad inv() const;
  PadicQuad pow(long e) const;
  PadicQuad conj() const;  // a + b(t - w), the Galois involution
  PadicNum norm() const { return mul(conj()).re_checked_(); }
  PadicNum trace() const;

  static bool agree(const PadicQuad& x, const PadicQuad& y, long k);
  std::string str() const;

 private:
  PadicNum a_, b_;
  long t_ = 0;
  Integer n_ = 0;
  PadicNum re_checked_() const;  // asserts the imaginary part vanishes
  static void match_(const PadicQuad& x, const PadicQuad& y);
};

inline PadicQuad operator+(const PadicQuad& x, const PadicQuad& y) { return x.add(y); }
inline PadicQuad operator-(const PadicQuad& x, const PadicQuad& y) { return x.sub(y); }
inline PadicQuad operator*(const PadicQuad& x, const PadicQuad& y) { return x.mul(y); }
inline PadicQuad operator/(const PadicQuad& x, const PadicQuad& y) { return x.div(y); }

struct HenselRoots {
  PadicNum alpha;  // the unit root
  PadicNum beta;   // c / alpha
};

// Unit root of X^2 - a_p X + c (equivalently inverse-root of 1 - a_p X + c X^2;
// single convention fixed project-wide). Requires a_p a p-adic unit and
// val_p(c) > 0 so the unit root is unique; both roots then live in Q_p.
HenselRoots hensel_ordinary_root(const Rational& a_p, const Rational& c, long p, long prec);

}  // namespace mf

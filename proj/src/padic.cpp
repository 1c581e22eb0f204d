#include "mf/padic.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mf/errors.hpp"

namespace mf {

namespace {

constexpr long kInfPrec = std::numeric_limits<long>::max() / 4;

Integer pow_p(long p, long e) {
  if (e < 0) fail(Err::Internal, "pow_p with negative exponent");
  return int_pow(Integer(p), static_cast<unsigned long>(e));
}

// strip all p's from z (z nonzero), return count
long strip_p(Integer& z, long p) {
  long v = 0;
  Integer q, r;
  for (;;) {
    mpz_tdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), z.get_mpz_t(), static_cast<unsigned long>(p));
    if (r != 0) break;
    z = q;
    ++v;
  }
  return v;
}

Integer mod_pk(const Integer& z, const Integer& pk) {
  Integer r;
  mpz_mod(r.get_mpz_t(), z.get_mpz_t(), pk.get_mpz_t());
  return r;
}

Integer inv_mod(const Integer& u, const Integer& pk) {
  Integer r;
  if (mpz_invert(r.get_mpz_t(), u.get_mpz_t(), pk.get_mpz_t()) == 0)
    fail(Err::Internal, "non-invertible unit part");
  return r;
}

}  // namespace

PadicNum PadicNum::exact_zero(long p, long prec) {
  PadicNum x;
  x.p_ = p;
  x.state_ = St::Exact0;
  x.prec_ = prec;
  return x;
}

PadicNum PadicNum::zero_to_prec(long p, long prec) {
  PadicNum x;
  x.p_ = p;
  x.state_ = St::Zero2Prec;
  x.prec_ = prec;
  return x;
}

PadicNum PadicNum::from_unit(long p, long val, Integer unit, long prec) {
  if (prec - val < 1) return zero_to_prec(p, prec);
  PadicNum x;
  x.p_ = p;
  x.state_ = St::NonZero;
  x.val_ = val;
  x.prec_ = prec;
  x.unit_ = std::move(unit);
  x.normalize_();
  return x;
}

PadicNum PadicNum::from_rational(const Rational& r, long p, long prec) {
  if (p < 2) fail(Err::Schema, "prime must be >= 2");
  if (r == 0) return exact_zero(p, prec);
  Integer num = r.get_num(), den = r.get_den();
  long v = 0;
  v += strip_p(num, p);
  v -= strip_p(den, p);
  if (prec - v < 1) return zero_to_prec(p, prec);
  Integer pk = pow_p(p, prec - v);
  Integer u = mod_pk(num * inv_mod(mod_pk(den, pk), pk), pk);
  return from_unit(p, v, u, prec);
}

void PadicNum::normalize_() {
  if (state_ != St::NonZero) return;
  Integer pk = pow_p(p_, prec_ - val_);
  unit_ = mod_pk(unit_, pk);
  if (unit_ == 0) {
    state_ = St::Zero2Prec;
    return;
  }
  long extra = strip_p(unit_, p_);
  if (extra > 0) {
    val_ += extra;
    if (prec_ - val_ < 1) {
      state_ = St::Zero2Prec;
      return;
    }
    unit_ = mod_pk(unit_, pow_p(p_, prec_ - val_));
  }
}

void PadicNum::match_(const PadicNum& x, const PadicNum& y) {
  if (!x.valid() || !y.valid()) fail(Err::Internal, "uninitialized p-adic operand");
  if (x.p_ != y.p_) fail(Err::RingMismatch, "p-adic primes differ");
}

long PadicNum::val() const {
  if (state_ == St::Exact0) fail(Err::ZeroElement, "valuation of exact zero");
  if (state_ == St::Zero2Prec) return prec_;  // only a lower bound is known
  return val_;
}

long PadicNum::prec() const { return state_ == St::Exact0 ? kInfPrec : prec_; }

long PadicNum::rel_prec() const {
  if (state_ != St::NonZero) return state_ == St::Exact0 ? kInfPrec : 0;
  return prec_ - val_;
}

PadicNum PadicNum::operator-() const {
  if (state_ != St::NonZero) return *this;
  PadicNum x = *this;
  x.unit_ = mod_pk(-unit_, pow_p(p_, prec_ - val_));
  return x;
}

PadicNum PadicNum::add(const PadicNum& y) const {
  match_(*this, y);
  if (state_ == St::Exact0) return y;
  if (y.state_ == St::Exact0) return *this;
  long N = std::min(prec_, y.prec_);
  if (state_ == St::Zero2Prec || y.state_ == St::Zero2Prec) {
    const PadicNum& z = (state_ == St::Zero2Prec) ? y : *this;
    if (z.state_ == St::Zero2Prec || z.val_ >= N) return zero_to_prec(p_, N);
    return from_unit(p_, z.val_, z.unit_, N);
  }
  long v = std::min(val_, y.val_);
  if (N - v < 1) return zero_to_prec(p_, N);
  Integer s = unit_ * pow_p(p_, val_ - v) + y.unit_ * pow_p(p_, y.val_ - v);
  return from_unit(p_, v, std::move(s), N);
}

PadicNum PadicNum::mul(const PadicNum& y) const {
  match_(*this, y);
  if (state_ == St::Exact0 || y.state_ == St::Exact0) return exact_zero(p_, std::min(prec(), y.prec()));
  if (state_ == St::Zero2Prec || y.state_ == St::Zero2Prec) {
    // v(xy) >= prec(zero side) + val(other side); other side Zero2Prec counts its prec as val bound
    long bound = 0;
    bound += (state_ == St::Zero2Prec) ? prec_ : val_;
    bound += (y.state_ == St::Zero2Prec) ? y.prec_ : y.val_;
    return zero_to_prec(p_, bound);
  }
  long rel = std::min(prec_ - val_, y.prec_ - y.val_);
  if (rel < 1) fail(Err::PrecisionExhausted, "no significant digits left in product");
  long v = val_ + y.val_;
  Integer u = mod_pk(unit_ * y.unit_, pow_p(p_, rel));
  return from_unit(p_, v, std::move(u), v + rel);
}

PadicNum PadicNum::inv() const {
  if (!valid()) fail(Err::Internal, "uninitialized p-adic operand");
  if (state_ == St::Exact0) fail(Err::DivisionByZero, "inverse of exact zero");
  if (state_ == St::Zero2Prec)
    fail(Err::Indistinguishable, "inverse of a value indistinguishable from zero");
  long rel = prec_ - val_;
  Integer u = inv_mod(unit_, pow_p(p_, rel));
  return from_unit(p_, -val_, std::move(u), -val_ + rel);
}

PadicNum PadicNum::div(const PadicNum& y) const {
  match_(*this, y);
  if (y.state_ == St::Exact0) fail(Err::DivisionByZero, "division by exact zero");
  if (y.state_ == St::Zero2Prec)
    fail(Err::Indistinguishable, "division by a value indistinguishable from zero");
  if (state_ == St::Exact0) return exact_zero(p_, prec_);
  if (state_ == St::Zero2Prec) return zero_to_prec(p_, prec_ - y.val_);
  return mul(y.inv());
}

PadicNum PadicNum::pow(long e) const {
  if (!valid()) fail(Err::Internal, "uninitialized p-adic operand");
  long hint = std::max<long>(
      1, std::min<long>(state_ == St::NonZero ? prec_ - val_ : prec_, 1L << 16));
  if (e == 0) return one(p_, hint);
  if (e < 0) return inv().pow(-e);
  PadicNum acc = one(p_, hint);
  PadicNum base = *this;
  for (long k = e; k > 0; k >>= 1) {
    if (k & 1) acc = acc.mul(base);
    if (k > 1) base = base.mul(base);
  }
  return acc;
}

PadicNum PadicNum::truncated(long new_prec) const {
  if (state_ == St::Exact0) return *this;
  if (new_prec >= prec_) return *this;
  if (state_ == St::Zero2Prec) return zero_to_prec(p_, new_prec);
  return from_unit(p_, val_, unit_, new_prec);
}

Integer PadicNum::residue(long k) const {
  if (!valid()) fail(Err::Internal, "uninitialized p-adic operand");
  if (state_ == St::Exact0) return 0;
  if (prec() < k) fail(Err::PrecisionExhausted, "residue requested beyond known precision");
  if (state_ == St::Zero2Prec) return 0;
  if (val_ < 0) fail(Err::Internal, "residue of negative-valuation value");
  return mod_pk(unit_ * pow_p(p_, val_), pow_p(p_, k));
}

bool PadicNum::agree(const PadicNum& x, const PadicNum& y, long k) {
  PadicNum d = x.sub(y);
  if (d.state_ == St::Exact0) return true;
  if (d.state_ == St::Zero2Prec) {
    if (d.prec_ >= k) return true;
    fail(Err::Indistinguishable, "difference vanishes to lower precision than required");
  }
  if (d.val_ >= k) return true;
  if (d.prec_ < k)
    fail(Err::Indistinguishable, "comparison requested beyond known precision");
  return false;
}

std::string PadicNum::str() const {
  std::ostringstream os;
  if (!valid()) return "<uninit>";
  if (state_ == St::Exact0) {
    os << "0 (exact)";
  } else if (state_ == St::Zero2Prec) {
    os << "O(" << p_ << "^" << prec_ << ")";
  } else {
    if (val_ != 0) os << p_ << "^" << val_ << "*";
    os << unit_.get_str() << " + O(" << p_ << "^" << prec_ << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

PadicQuad::PadicQuad(PadicNum a, PadicNum b, long t, Integer n)
    : a_(std::move(a)), b_(std::move(b)), t_(t), n_(std::move(n)) {
  if (!a_.valid() || !b_.valid() || a_.prime() != b_.prime())
    fail(Err::RingMismatch, "quadratic components over different rings");
}

PadicQuad PadicQuad::from_base(const PadicNum& a, long t, Integer n) {
  return PadicQuad(a, PadicNum::exact_zero(a.prime(), std::min<long>(a.prec(), 64)), t,
                   std::move(n));
}

namespace {

// relative precision to give exact integer scalars (t, n) so they never cap
// the precision of the value they multiply; exact zeros report a huge
// sentinel which must be clamped before any power-of-p is computed
long quad_scalar_prec(std::initializer_list<const PadicNum*> zs) {
  long m = 1;
  for (const PadicNum* z : zs) {
    long r = z->rel_prec();
    if (r < kInfPrec / 2) m = std::max(m, r);
  }
  return std::min(m, 1L << 16) + 4;
}

}  // namespace

void PadicQuad::match_(const PadicQuad& x, const PadicQuad& y) {
  if (x.prime() != y.prime() || x.t_ != y.t_ || x.n_ != y.n_)
    fail(Err::RingMismatch, "quadratic extensions differ");
}

long PadicQuad::val() const {
  if (a_.vanishes() && b_.vanishes())
    return std::min(a_.is_exact_zero() ? b_.prec() : a_.prec(),
                    b_.is_exact_zero() ? a_.prec() : b_.prec());
  if (a_.vanishes()) return std::min(a_.prec(), b_.val());
  if (b_.vanishes()) return std::min(b_.prec(), a_.val());
  return std::min(a_.val(), b_.val());
}

PadicQuad PadicQuad::operator-() const { return PadicQuad(-a_, -b_, t_, n_); }

PadicQuad PadicQuad::add(const PadicQuad& y) const {
  match_(*this, y);
  return PadicQuad(a_ + y.a_, b_ + y.b_, t_, n_);
}

PadicQuad PadicQuad::mul(const PadicQuad& y) const {
  match_(*this, y);
  // (a1 + b1 w)(a2 + b2 w), w^2 = t w - n
  long p = prime();
  long sp = quad_scalar_prec({&a_, &b_, &y.a_, &y.b_});
  PadicNum tP = PadicNum::from_rational(Rational(t_), p, sp);
  PadicNum nP = PadicNum::from_rational(Rational(n_), p, sp);
  PadicNum bb = b_ * y.b_;
  PadicNum a = a_ * y.a_ - nP * bb;
  PadicNum b = a_ * y.b_ + b_ * y.a_ + tP * bb;
  return PadicQuad(std::move(a), std::move(b), t_, n_);
}

PadicQuad PadicQuad::conj() const {
  // w bar = t - w
  long p = prime();
  PadicNum tP = PadicNum::from_rational(Rational(t_), p, quad_scalar_prec({&a_, &b_}));
  return PadicQuad(a_ + tP * b_, -b_, t_, n_);
}

PadicNum PadicQuad::re_checked_() const {
  if (!b_.vanishes()) fail(Err::Internal, "expected base-field value");
  return a_;
}

PadicNum PadicQuad::trace() const {
  long p = prime();
  PadicNum tP = PadicNum::from_rational(Rational(t_), p, quad_scalar_prec({&a_, &b_}));
  return a_ + a_ + tP * b_;
}

PadicQuad PadicQuad::inv() const {
  if (vanishes()) {
    if (a_.is_exact_zero() && b_.is_exact_zero())
      fail(Err::DivisionByZero, "inverse of exact zero");
    fail(Err::Indistinguishable, "inverse of a value indistinguishable from zero");
  }
  PadicQuad cj = conj();
  PadicNum nm = mul(cj).re_checked_();
  return PadicQuad(cj.a_ / nm, cj.b_ / nm, t_, n_);
}

PadicQuad PadicQuad::div(const PadicQuad& y) const {
  match_(*this, y);
  return mul(y.inv());
}

PadicQuad PadicQuad::pow(long e) const {
  long p = prime();
  PadicQuad acc = from_base(PadicNum::one(p, quad_scalar_prec({&a_, &b_})), t_, n_);
  if (e == 0) return acc;
  PadicQuad base = e < 0 ? inv() : *this;
  for (long k = e < 0 ? -e : e; k > 0; k >>= 1) {
    if (k & 1) acc = acc.mul(base);
    if (k > 1) base = base.mul(base);
  }
  return acc;
}

bool PadicQuad::agree(const PadicQuad& x, const PadicQuad& y, long k) {
  match_(x, y);
  return PadicNum::agree(x.a_, y.a_, k) && PadicNum::agree(x.b_, y.b_, k);
}

std::string PadicQuad::str() const {
  return "(" + a_.str() + ") + (" + b_.str() + ")*w";
}

// ---------------------------------------------------------------------------

HenselRoots hensel_ordinary_root(const Rational& a_p, const Rational& c, long p, long prec) {
  if (p < 2) fail(Err::Schema, "prime must be >= 2");
  if (prec < 1) fail(Err::Schema, "precision must be >= 1");
  if (a_p == 0 || rat_val(a_p, p) != 0)
    fail(Err::NotOrdinary, "trace coefficient is not a p-adic unit");
  if (c != 0 && rat_val(c, p) < 1)
    fail(Err::NotOrdinary, "constant coefficient is not divisible by p");

  if (c == 0) {
    // X^2 - a_p X: unit root is a_p exactly, the other root is exactly 0
    HenselRoots r;
    r.alpha = PadicNum::from_rational(a_p, p, prec);
    r.beta = PadicNum::exact_zero(p, prec);
    return r;
  }

  // Newton iteration for f(X) = X^2 - a_p X + c from X0 = a_p; f'(X0) is a
  // unit, so precision doubles each step. All arithmetic mod p^prec on
  // integer residues (a_p, c have p-integral reductions by the guards above).
  Integer pN = int_pow(Integer(p), static_cast<unsigned long>(prec));
  auto embed = [&](const Rational& r) {
    Integer den_inv;
    Integer den = mod_pk(r.get_den(), pN);
    if (mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), pN.get_mpz_t()) == 0)
      fail(Err::NotOrdinary, "coefficient has negative p-adic valuation");
    return mod_pk(r.get_num() * den_inv, pN);
  };
  Integer A = embed(a_p), C = embed(c);
  Integer x = A;
  for (int it = 0; it < 64; ++it) {
    Integer fx = mod_pk(x * x - A * x + C, pN);
    if (fx == 0) break;
    Integer dfx = mod_pk(2 * x - A, pN);
    Integer dfx_inv;
    if (mpz_invert(dfx_inv.get_mpz_t(), dfx.get_mpz_t(), pN.get_mpz_t()) == 0)
      fail(Err::Internal, "derivative not invertible during Newton step");
    x = mod_pk(x - fx * dfx_inv, pN);
  }
  Integer check = mod_pk(x * x - A * x + C, pN);
  if (check != 0) fail(Err::Internal, "Newton iteration failed to converge");

  HenselRoots r;
  r.alpha = PadicNum::from_unit(p, 0, x, prec);
  r.beta = PadicNum::from_rational(c, p, prec) / r.alpha;
  return r;
}

}  // namespace mf

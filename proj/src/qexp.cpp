#include "mf/qexp.hpp"

#include <algorithm>
#include <set>

#include "mf/errors.hpp"

namespace mf {

// --------------------------------------------------------------------------
// coefficient ring

namespace {
constexpr long kClampPrec = 1L << 16;
long clamp_prec(long n) { return std::max(1L, std::min(n, kClampPrec)); }
}  // namespace

PadicNum promote_rational(const Rational& r, const PadicNum& like) {
  long p = like.prime();
  if (p == 0) fail(Err::Internal, "promotion against uninitialized p-adic");
  if (r == 0) return PadicNum::exact_zero(p, clamp_prec(like.prec()));
  long vr = rat_val(r, p);
  long target = std::max(clamp_prec(like.prec()), vr + clamp_prec(like.rel_prec()));
  return PadicNum::from_rational(r, p, target);
}

PadicQuad promote_to_quad(const Coeff& c, const PadicQuad& like) {
  if (const auto* q = std::get_if<PadicQuad>(&c)) return *q;
  long t = like.gen_trace();
  const Integer& n = like.gen_norm();
  long hint = clamp_prec(std::min(like.re().prec(), like.im().prec()));
  if (const auto* x = std::get_if<PadicNum>(&c))
    return PadicQuad(*x, PadicNum::exact_zero(x->prime(), hint), t, n);
  const Rational& r = std::get<Rational>(c);
  PadicNum base = PadicNum::from_rational(
      r, like.prime(), r == 0 ? hint : rat_val(r, like.prime()) + hint);
  return PadicQuad(base, PadicNum::exact_zero(like.prime(), hint), t, n);
}

namespace {

// bring x, y into their common ring (index max), then apply
template <typename FR, typename FP, typename FQ>
Coeff dispatch2(const Coeff& x, const Coeff& y, FR fr, FP fp, FQ fq) {
  if (x.index() == 0 && y.index() == 0)
    return fr(std::get<Rational>(x), std::get<Rational>(y));
  if (x.index() == 2 || y.index() == 2) {
    const PadicQuad& like = std::get<PadicQuad>(x.index() == 2 ? x : y);
    return fq(promote_to_quad(x, like), promote_to_quad(y, like));
  }
  const PadicNum& like = std::get<PadicNum>(x.index() == 1 ? x : y);
  PadicNum xa = x.index() == 1 ? std::get<PadicNum>(x) : promote_rational(std::get<Rational>(x), like);
  PadicNum ya = y.index() == 1 ? std::get<PadicNum>(y) : promote_rational(std::get<Rational>(y), like);
  return fp(xa, ya);
}

}  // namespace

Coeff cadd(const Coeff& x, const Coeff& y) {
  return dispatch2(
      x, y, [](const Rational& a, const Rational& b) -> Coeff { return Rational(a + b); },
      [](const PadicNum& a, const PadicNum& b) -> Coeff { return a + b; },
      [](const PadicQuad& a, const PadicQuad& b) -> Coeff { return a + b; });
}

Coeff cmul(const Coeff& x, const Coeff& y) {
  return dispatch2(
      x, y, [](const Rational& a, const Rational& b) -> Coeff { return Rational(a * b); },
      [](const PadicNum& a, const PadicNum& b) -> Coeff { return a * b; },
      [](const PadicQuad& a, const PadicQuad& b) -> Coeff { return a * b; });
}

Coeff cdiv(const Coeff& x, const Coeff& y) {
  return dispatch2(
      x, y,
      [](const Rational& a, const Rational& b) -> Coeff {
        if (b == 0) fail(Err::DivisionByZero, "rational division by zero");
        return Rational(a / b);
      },
      [](const PadicNum& a, const PadicNum& b) -> Coeff { return a / b; },
      [](const PadicQuad& a, const PadicQuad& b) -> Coeff { return a / b; });
}

Coeff cneg(const Coeff& x) {
  if (const auto* r = std::get_if<Rational>(&x)) return Rational(-*r);
  if (const auto* p = std::get_if<PadicNum>(&x)) return -*p;
  return -std::get<PadicQuad>(x);
}

Coeff cpow(const Coeff& x, long e) {
  if (const auto* r = std::get_if<Rational>(&x)) return rat_pow(*r, e);
  if (const auto* p = std::get_if<PadicNum>(&x)) return p->pow(e);
  return std::get<PadicQuad>(x).pow(e);
}

bool cagree(const Coeff& x, const Coeff& y, long k) {
  if (x.index() == 0 && y.index() == 0)
    return std::get<Rational>(x) == std::get<Rational>(y);
  if (k <= 0) fail(Err::Schema, "p-adic agreement needs a positive modulus exponent");
  bool out = false;
  dispatch2(
      x, y,
      [](const Rational&, const Rational&) -> Coeff { return Rational(0); },
      [&](const PadicNum& a, const PadicNum& b) -> Coeff {
        out = PadicNum::agree(a, b, k);
        return Rational(0);
      },
      [&](const PadicQuad& a, const PadicQuad& b) -> Coeff {
        out = PadicQuad::agree(a, b, k);
        return Rational(0);
      });
  return out;
}

std::string cstr(const Coeff& c) {
  if (const auto* r = std::get_if<Rational>(&c)) return rat_str(*r);
  if (const auto* p = std::get_if<PadicNum>(&c)) return p->str();
  return std::get<PadicQuad>(c).str();
}

// --------------------------------------------------------------------------
// EllipticQExp

EllipticQExp::EllipticQExp(WeightData wt, long level, long trunc)
    : wt_(wt), level_(level), trunc_(trunc) {
  if (wt.is_hilbert) fail(Err::Schema, "elliptic expansion needs an elliptic weight");
  if (level < 1 || trunc < 0) fail(Err::Schema, "bad level or trunc");
}

void EllipticQExp::set(long n, Coeff v) {
  if (n < 1) fail(Err::Schema, "cusp form coefficients start at n = 1");
  if (n > trunc_) fail(Err::Schema, "coefficient index beyond trunc");
  if (cis_exact_zero(v)) {
    c_.erase(n);
    return;
  }
  c_[n] = std::move(v);
}

Coeff EllipticQExp::at(long n) const {
  if (n < 1) return Rational(0);
  if (n > trunc_) fail(Err::Internal, "coefficient read beyond trunc");
  auto it = c_.find(n);
  return it == c_.end() ? Coeff(Rational(0)) : it->second;
}

EllipticQExp EllipticQExp::with_weight(WeightData wt) const {
  EllipticQExp f = *this;
  f.wt_ = wt;
  return f;
}

EllipticQExp EllipticQExp::with_level(long level) const {
  EllipticQExp f = *this;
  f.level_ = level;
  return f;
}

EllipticQExp EllipticQExp::with_trunc(long trunc) const {
  if (trunc > trunc_) fail(Err::InsufficientTruncation, "cannot extend trunc");
  EllipticQExp f(wt_, level_, trunc);
  for (const auto& [n, v] : c_)
    if (n <= trunc) f.c_.emplace(n, v);
  return f;
}

// --------------------------------------------------------------------------
// HilbertQExp

HilbertQExp::HilbertQExp(QuadField L, WeightData wt, std::string level, long trunc)
    : L_(L), wt_(wt), level_(std::move(level)), trunc_(trunc) {
  if (!wt.is_hilbert) fail(Err::Schema, "hilbert expansion needs a hilbert weight");
  if (trunc < 0) fail(Err::Schema, "bad trunc");
}

XiKey HilbertQExp::key_of(const QuadElem& xi) const {
  if (!L_.integral(xi) || !L_.totally_positive(xi))
    fail(Err::Schema, "support must be integral and totally positive");
  Rational tr = L_.trace(xi);
  return XiKey{static_cast<long>(tr.get_num().get_si()),
               static_cast<long>(xi.b.get_num().get_si())};
}

QuadElem HilbertQExp::xi_of(const XiKey& k) const {
  long anum = k.tr - k.b * L_.gen_trace();
  if (anum % 2 != 0) fail(Err::Internal, "invalid coefficient key");
  return QuadElem{Rational(anum / 2), Rational(k.b)};
}

void HilbertQExp::set(const QuadElem& xi, Coeff v) { set_key(key_of(xi), std::move(v)); }

void HilbertQExp::set_key(const XiKey& k, Coeff v) {
  if (k.tr < 1) fail(Err::Schema, "cusp form support has positive trace");
  if (k.tr > trunc_) fail(Err::Schema, "coefficient key beyond trunc");
  if (cis_exact_zero(v)) {
    c_.erase(k);
    return;
  }
  c_[k] = std::move(v);
}

Coeff HilbertQExp::at(const QuadElem& xi) const { return at_key(key_of(xi)); }

Coeff HilbertQExp::at_key(const XiKey& k) const {
  if (k.tr < 1) return Rational(0);
  if (k.tr > trunc_) fail(Err::Internal, "coefficient read beyond trunc");
  auto it = c_.find(k);
  return it == c_.end() ? Coeff(Rational(0)) : it->second;
}

HilbertQExp HilbertQExp::with_weight(WeightData wt) const {
  HilbertQExp g = *this;
  g.wt_ = wt;
  return g;
}

HilbertQExp HilbertQExp::with_level(std::string level) const {
  HilbertQExp g = *this;
  g.level_ = std::move(level);
  return g;
}

HilbertQExp HilbertQExp::with_trunc(long trunc) const {
  if (trunc > trunc_) fail(Err::InsufficientTruncation, "cannot extend trunc");
  HilbertQExp g(L_, wt_, level_, trunc);
  for (const auto& [k, v] : c_)
    if (k.tr <= trunc) g.c_.emplace(k, v);
  return g;
}

// --------------------------------------------------------------------------
// EigenData

const Rational& EigenData::eig(const std::string& label) const {
  auto it = ap.find(label);
  if (it == ap.end()) fail(Err::MissingEigenvalue, "no eigenvalue stored for " + label);
  return it->second;
}

const Rational& EigenData::chi(const std::string& label) const {
  auto it = psi0.find(label);
  if (it == psi0.end()) fail(Err::MissingEigenvalue, "no character value stored for " + label);
  return it->second;
}

// --------------------------------------------------------------------------
// OpContext

OpContext::OpContext(const QuadField& L, long p, long prec)
    : L_(L), p_(p), prec_(prec), split_(L.splitting_type(p)) {
  if (split_ == Splitting::Ramified)
    fail(Err::WrongSplitting, "ramified working primes are unsupported");
  primes_ = L.primes_above(p);
  if (split_ == Splitting::Split) emb_.emplace(L, p, prec);
}

const PrimeAbove& OpContext::prime(int index) const {
  for (const auto& pr : primes_)
    if (pr.index == index) return pr;
  fail(Err::Schema, "no prime with requested index above p");
}

Coeff OpContext::embed_power(const QuadElem& m, long e1, long e2) const {
  if (L_.is_zero(m)) fail(Err::ZeroElement, "embedding power of zero");
  if (e1 == 0 && e2 == 0) return Rational(1);
  if (L_.is_rational(m)) return rat_pow(m.a, e1 + e2);
  if (e1 == e2) return rat_pow(L_.norm(m), e1);
  if (split_ == Splitting::Split) {
    PadicNum z1 = emb_->embed(m, 1), z2 = emb_->embed(m, 2);
    return z1.pow(e1) * z2.pow(e2);
  }
  if (p_ == 2) fail(Err::WrongSplitting, "non-parallel embedding powers need p odd");
  PadicQuad z = quad_ext_embed(L_, m, p_, prec_);
  return z.pow(e1) * z.conj().pow(e2);
}

// --------------------------------------------------------------------------
// truncation scans

namespace {

long rat_floor(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q.get_si();
}

}  // namespace

// largest M' such that every totally positive xi with tr(xi) <= M' has
// tr(xi * pim) <= in_trunc (soundness of the up-shift read)
long unshift_out_trunc(const QuadField& L, const QuadElem& pim, long in_trunc) {
  Rational trp = L.trace(pim), np = L.norm(pim);
  // tr(xi*pim) >= tr(xi) * N(pim)/tr(pim), so violations are guaranteed here:
  long cap = rat_floor(Rational(in_trunc) * trp / np) + 2;
  for (long n = 1; n <= cap; ++n)
    for (const QuadElem& xi : L.enumerate_totally_positive_by_trace(n))
      if (L.trace(L.mul(xi, pim)) > in_trunc) return n - 1;
  return cap;
}

// largest M' such that every pim-divisible totally positive xi with
// tr(xi) <= M' has tr(xi/pim) <= in_trunc (soundness of the down-shift read):
// scan over the quotients, whose traces start above in_trunc
long shift_out_trunc(const QuadField& L, const QuadElem& pim, long in_trunc) {
  Rational trp = L.trace(pim), np = L.norm(pim);
  long best = -1;
  for (long t = in_trunc + 1;; ++t) {
    // tr(z*pim) >= t * N/tr: once that exceeds the best found, stop
    if (best >= 0 && Rational(t) * np / trp > best) break;
    if (best < 0 && t > (in_trunc + 2) * (rat_floor(trp) + 1) + 4)
      fail(Err::Internal, "shift trunc scan did not terminate");
    for (const QuadElem& z : L.enumerate_totally_positive_by_trace(t)) {
      Rational v = L.trace(L.mul(z, pim));
      long vi = v.get_num().get_si();
      if (best < 0 || vi < best) best = vi;
    }
  }
  if (best < 1) fail(Err::Internal, "empty shift trunc scan");
  return best - 1;
}

// --------------------------------------------------------------------------
// elliptic operators

EllipticQExp ell_zero_like(const EllipticQExp& f) {
  return EllipticQExp(f.weight(), f.level(), f.trunc());
}

EllipticQExp ell_add(const EllipticQExp& f, const EllipticQExp& g) {
  if (!(f.weight() == g.weight())) fail(Err::Schema, "weight mismatch in sum");
  EllipticQExp out(f.weight(), std::max(f.level(), g.level()), std::min(f.trunc(), g.trunc()));
  std::set<long> keys;
  for (const auto& [n, v] : f.coeffs())
    if (n <= out.trunc()) keys.insert(n);
  for (const auto& [n, v] : g.coeffs())
    if (n <= out.trunc()) keys.insert(n);
  for (long n : keys) out.set(n, cadd(f.at(n), g.at(n)));
  return out;
}

EllipticQExp ell_sub(const EllipticQExp& f, const EllipticQExp& g) {
  return ell_add(f, ell_scale(g, Rational(-1)));
}

EllipticQExp ell_scale(const EllipticQExp& f, const Coeff& s) {
  EllipticQExp out = ell_zero_like(f);
  for (const auto& [n, v] : f.coeffs()) out.set(n, cmul(v, s));
  return out;
}

EllipticQExp ell_promote(const EllipticQExp& f, long p, long prec) {
  EllipticQExp out = ell_zero_like(f);
  for (const auto& [n, v] : f.coeffs()) {
    if (const auto* r = std::get_if<Rational>(&v))
      out.set(n, PadicNum::from_rational(*r, p, std::max(prec, rat_val(*r, p) + prec)));
    else
      out.set(n, v);
  }
  return out;
}

EllipticQExp ell_U0(const EllipticQExp& f, long p, long m, long min_out_trunc) {
  Integer pm = int_pow(Integer(p), static_cast<unsigned long>(m));
  long pml = pm.get_si();
  long out_trunc = f.trunc() / pml;
  if (out_trunc < std::max(1L, min_out_trunc))
    fail(Err::InsufficientTruncation, "U0 output trunc " + std::to_string(out_trunc));
  EllipticQExp out(f.weight(), f.level(), out_trunc);
  for (long n = 1; n <= out_trunc; ++n) {
    Coeff v = f.at(n * pml);
    if (!cis_exact_zero(v)) out.set(n, std::move(v));
  }
  return out;
}

EllipticQExp ell_plain_shift(const EllipticQExp& f, long p, long m) {
  long pml = int_pow(Integer(p), static_cast<unsigned long>(m)).get_si();
  long out_trunc = (f.trunc() + 1) * pml - 1;
  EllipticQExp out(f.weight(), f.level() * pml, out_trunc);
  for (const auto& [n, v] : f.coeffs()) out.set(n * pml, v);
  return out;
}

EllipticQExp ell_V(const EllipticQExp& f, long p, long m) {
  // V(p)^m scales by p^{-v m} with v = 1 - w; rational, so every ring is fine
  Rational s = rat_pow(Rational(p), -f.weight().v1() * m);
  return ell_scale(ell_plain_shift(f, p, m), s);
}

EllipticQExp ell_U(const EllipticQExp& f, long p, long m, long min_out_trunc) {
  Rational s = rat_pow(Rational(p), f.weight().v1() * m);
  return ell_scale(ell_U0(f, p, m, min_out_trunc), s);
}

EllipticQExp ell_T0(const EllipticQExp& f, long q, const Rational& psi0_q,
                    long min_out_trunc) {
  if (f.level() % q == 0) fail(Err::PrimeDividesLevel, "T0 needs q prime to the level");
  long out_trunc = f.trunc() / q;
  if (out_trunc < std::max(1L, min_out_trunc))
    fail(Err::InsufficientTruncation, "T0 output trunc " + std::to_string(out_trunc));
  EllipticQExp out(f.weight(), f.level(), out_trunc);
  Rational scale = Rational(q) * psi0_q;
  for (long n = 1; n <= out_trunc; ++n) {
    Coeff v = f.at(n * q);
    if (n % q == 0) v = cadd(v, cmul(f.at(n / q), Coeff(scale)));
    if (!cis_exact_zero(v)) out.set(n, std::move(v));
  }
  return out;
}

EllipticQExp ell_deplete(const EllipticQExp& f, long p) {
  EllipticQExp out = ell_zero_like(f);
  for (const auto& [n, v] : f.coeffs())
    if (n % p != 0) out.set(n, v);
  return out;
}

EllipticQExp ell_theta(const EllipticQExp& f, long r, long p) {
  EllipticQExp out = ell_zero_like(f).with_weight(f.weight().theta_shift(r, 0));
  for (const auto& [n, v] : f.coeffs()) {
    if (r < 0 && n % p == 0)
      fail(Err::NonUnitSupport, "negative theta exponent on non-depleted support");
    out.set(n, cmul(v, Coeff(rat_pow(Rational(n), r))));
  }
  return out;
}

EllipticQExp ell_stabilize(const EllipticQExp& f, const Coeff& beta0, long p) {
  EllipticQExp shifted = ell_scale(ell_plain_shift(f, p, 1), beta0);
  return ell_sub(f.with_level(f.level() * p), shifted);
}

EllipticQExp ell_retag(const EllipticQExp& f, long delta) {
  return f.with_weight(f.weight().retag(delta));
}

bool ell_hecke_identity_check(const EllipticQExp& f, long p, const Rational& psi0_p,
                              long agree_mod) {
  EllipticQExp lhs = ell_T0(f, p, psi0_p);
  // independent path: U0 + N(p) [p] with the diamond character as a scalar
  EllipticQExp up = ell_U0(f, p);
  EllipticQExp down = ell_scale(ell_plain_shift(f, p, 1), Rational(p) * psi0_p);
  EllipticQExp rhs = ell_add(up, down.with_level(f.level()));
  return ell_agree(lhs, rhs, agree_mod);
}

// --------------------------------------------------------------------------
// Hilbert operators

HilbertQExp hil_zero_like(const HilbertQExp& g) {
  return HilbertQExp(g.field(), g.weight(), g.level(), g.trunc());
}

HilbertQExp hil_add(const HilbertQExp& g, const HilbertQExp& h) {
  if (!(g.weight() == h.weight())) fail(Err::Schema, "weight mismatch in sum");
  if (g.field().D() != h.field().D()) fail(Err::Schema, "field mismatch in sum");
  HilbertQExp out(g.field(), g.weight(), g.level(), std::min(g.trunc(), h.trunc()));
  std::set<XiKey> keys;
  for (const auto& [k, v] : g.coeffs())
    if (k.tr <= out.trunc()) keys.insert(k);
  for (const auto& [k, v] : h.coeffs())
    if (k.tr <= out.trunc()) keys.insert(k);
  for (const XiKey& k : keys) out.set_key(k, cadd(g.at_key(k), h.at_key(k)));
  return out;
}

HilbertQExp hil_sub(const HilbertQExp& g, const HilbertQExp& h) {
  return hil_add(g, hil_scale(h, Rational(-1)));
}

HilbertQExp hil_scale(const HilbertQExp& g, const Coeff& s) {
  HilbertQExp out = hil_zero_like(g);
  for (const auto& [k, v] : g.coeffs()) out.set_key(k, cmul(v, s));
  return out;
}

HilbertQExp hil_promote(const HilbertQExp& g, long p, long prec) {
  HilbertQExp out = hil_zero_like(g);
  for (const auto& [k, v] : g.coeffs()) {
    if (const auto* r = std::get_if<Rational>(&v))
      out.set_key(k, PadicNum::from_rational(*r, p, std::max(prec, rat_val(*r, p) + prec)));
    else
      out.set_key(k, v);
  }
  return out;
}

namespace {

QuadElem prime_power(const QuadField& L, const PrimeAbove& pr, long m) {
  return L.pow(pr.pi, m);
}

// RingMismatch when a non-rational scalar is about to meet plain-rational
// coefficients (the caller promotes explicitly; no implicit coercion)
void require_ring_for(const HilbertQExp& g, const Coeff& scalar) {
  if (scalar.index() == 0) return;
  for (const auto& [k, v] : g.coeffs())
    if (v.index() == 0)
      fail(Err::RingMismatch, "p-adic scalar on rational coefficients; promote first");
}

}  // namespace

HilbertQExp hil_U0(const HilbertQExp& g, const PrimeAbove& pr, long m, long min_out_trunc) {
  const QuadField& L = g.field();
  QuadElem pim = prime_power(L, pr, m);
  long out_trunc = unshift_out_trunc(L, pim, g.trunc());
  if (out_trunc < std::max(1L, min_out_trunc))
    fail(Err::InsufficientTruncation, "U0 output trunc " + std::to_string(out_trunc));
  HilbertQExp out(L, g.weight(), g.level(), out_trunc);
  for (long n = 1; n <= out_trunc; ++n) {
    for (const QuadElem& xi : L.enumerate_totally_positive_by_trace(n)) {
      Coeff v = g.at(L.mul(xi, pim));
      if (!cis_exact_zero(v)) out.set(xi, std::move(v));
    }
  }
  return out;
}

HilbertQExp hil_plain_shift(const HilbertQExp& g, const PrimeAbove& pr, long m) {
  const QuadField& L = g.field();
  QuadElem pim = prime_power(L, pr, m);
  long out_trunc = shift_out_trunc(L, pim, g.trunc());
  HilbertQExp out(L, g.weight(), g.level() + "*" + pr.label(), out_trunc);
  for (const auto& [k, v] : g.coeffs()) {
    QuadElem xi = L.mul(g.xi_of(k), pim);
    if (L.trace(xi) <= out_trunc) out.set(xi, v);
  }
  return out;
}

HilbertQExp hil_V(const HilbertQExp& g, const OpContext& ctx, const PrimeAbove& pr, long m) {
  QuadElem pim = prime_power(g.field(), pr, m);
  Coeff s = ctx.embed_power(pim, -g.weight().v1(), -g.weight().v2());
  require_ring_for(g, s);
  return hil_scale(hil_plain_shift(g, pr, m), s);
}

HilbertQExp hil_U(const HilbertQExp& g, const OpContext& ctx, const PrimeAbove& pr, long m,
                  long min_out_trunc) {
  QuadElem pim = prime_power(g.field(), pr, m);
  Coeff s = ctx.embed_power(pim, g.weight().v1(), g.weight().v2());
  require_ring_for(g, s);
  return hil_scale(hil_U0(g, pr, m, min_out_trunc), s);
}

HilbertQExp hil_T0(const HilbertQExp& g, const PrimeAbove& q, const Rational& psi0_q,
                   long min_out_trunc) {
  const QuadField& L = g.field();
  if (g.level().find(q.label()) != std::string::npos)
    fail(Err::PrimeDividesLevel, "T0 needs a prime away from the level");
  long up = unshift_out_trunc(L, q.pi, g.trunc());
  long down = shift_out_trunc(L, q.pi, g.trunc());
  long out_trunc = std::min(up, down);
  if (out_trunc < std::max(1L, min_out_trunc))
    fail(Err::InsufficientTruncation, "T0 output trunc " + std::to_string(out_trunc));
  HilbertQExp out(L, g.weight(), g.level(), out_trunc);
  Rational scale = q.nrm * psi0_q;
  for (long n = 1; n <= out_trunc; ++n) {
    for (const QuadElem& xi : L.enumerate_totally_positive_by_trace(n)) {
      Coeff v = g.at(L.mul(xi, q.pi));
      QuadElem quot = L.div(xi, q.pi);
      if (L.integral(quot)) v = cadd(v, cmul(g.at(quot), Coeff(scale)));
      if (!cis_exact_zero(v)) out.set(xi, std::move(v));
    }
  }
  return out;
}

HilbertQExp hil_deplete(const HilbertQExp& g, const std::vector<PrimeAbove>& Q) {
  const QuadField& L = g.field();
  HilbertQExp out = hil_zero_like(g);
  for (const auto& [k, v] : g.coeffs()) {
    QuadElem xi = g.xi_of(k);
    bool keep = true;
    for (const PrimeAbove& pr : Q)
      if (L.ord_at(xi, pr) > 0) keep = false;
    if (keep) out.set_key(k, v);
  }
  return out;
}

HilbertQExp hil_theta(const HilbertQExp& g, const OpContext& ctx, long r1, long r2) {
  const QuadField& L = g.field();
  HilbertQExp out = hil_zero_like(g).with_weight(g.weight().theta_shift(r1, r2));
  for (const auto& [k, v] : g.coeffs()) {
    QuadElem xi = g.xi_of(k);
    if (ctx.splitting() == Splitting::Split) {
      if (r1 < 0 && L.ord_at(xi, ctx.prime(1)) > 0)
        fail(Err::NonUnitSupport, "negative theta exponent on non-depleted support");
      if (r2 < 0 && L.ord_at(xi, ctx.prime(2)) > 0)
        fail(Err::NonUnitSupport, "negative theta exponent on non-depleted support");
    } else if ((r1 < 0 || r2 < 0) && L.ord_at(xi, ctx.prime(0)) > 0) {
      fail(Err::NonUnitSupport, "negative theta exponent on non-depleted support");
    }
    Coeff s = ctx.embed_power(xi, r1, r2);
    require_ring_for(g, s);
    out.set_key(k, cmul(v, s));
  }
  return out;
}

HilbertQExp hil_stabilize(const HilbertQExp& g, const Coeff& beta0, const PrimeAbove& pr) {
  HilbertQExp shifted = hil_scale(hil_plain_shift(g, pr, 1), beta0);
  HilbertQExp base = g.with_level(g.level() + "*" + pr.label());
  return hil_sub(base, shifted.with_level(base.level()));
}

HilbertQExp hil_retag(const HilbertQExp& g, long delta) {
  return g.with_weight(g.weight().retag(delta));
}

bool hil_hecke_identity_check(const HilbertQExp& g, const PrimeAbove& q,
                              const Rational& psi0_q, long agree_mod) {
  HilbertQExp lhs = hil_T0(g, q, psi0_q);
  HilbertQExp up = hil_U0(g, q, 1);
  HilbertQExp down = hil_scale(hil_plain_shift(g, q, 1), Coeff(q.nrm * psi0_q));
  HilbertQExp rhs = hil_add(up, down.with_level(g.level()));
  return hil_agree(lhs, rhs, agree_mod);
}

// --------------------------------------------------------------------------
// agreement

bool ell_agree(const EllipticQExp& f, const EllipticQExp& g, long k) {
  if (!(f.weight() == g.weight())) fail(Err::Schema, "weight mismatch in comparison");
  long M = std::min(f.trunc(), g.trunc());
  std::set<long> keys;
  for (const auto& [n, v] : f.coeffs())
    if (n <= M) keys.insert(n);
  for (const auto& [n, v] : g.coeffs())
    if (n <= M) keys.insert(n);
  for (long n : keys)
    if (!cagree(f.at(n), g.at(n), k)) return false;
  return true;
}

bool hil_agree(const HilbertQExp& f, const HilbertQExp& g, long k) {
  if (!(f.weight() == g.weight())) fail(Err::Schema, "weight mismatch in comparison");
  if (f.field().D() != g.field().D()) fail(Err::Schema, "field mismatch in comparison");
  long M = std::min(f.trunc(), g.trunc());
  std::set<XiKey> keys;
  for (const auto& [kk, v] : f.coeffs())
    if (kk.tr <= M) keys.insert(kk);
  for (const auto& [kk, v] : g.coeffs())
    if (kk.tr <= M) keys.insert(kk);
  for (const XiKey& kk : keys)
    if (!cagree(f.at_key(kk), g.at_key(kk), k)) return false;
  return true;
}

}  // namespace mf

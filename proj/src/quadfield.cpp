#include "mf/quadfield.hpp"

#include <algorithm>
#include <sstream>

#include "mf/errors.hpp"

namespace mf {

namespace {

// narrow class number one requires class number one and a fundamental unit of
// norm -1; desk-scale whitelist of such squarefree D
constexpr long kNarrowOne[] = {2, 5, 13, 17, 29, 37, 41, 53, 61, 73};

bool squarefree(long D) {
  for (long q = 2; q * q <= D; ++q)
    if (D % (q * q) == 0) return false;
  return true;
}

long mod_inv(long a, long p) {
  long t = 0, nt = 1, r = p, nr = ((a % p) + p) % p;
  while (nr != 0) {
    long q = r / nr;
    long tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  return ((t % p) + p) % p;
}

long rat_mod_p(const Rational& x, long p) {
  Integer num = x.get_num(), den = x.get_den(), r;
  mpz_mod_ui(r.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(p));
  long n = r.get_si();
  mpz_mod_ui(r.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(p));
  long d = r.get_si();
  if (d == 0) fail(Err::Internal, "residue of p-fractional rational");
  return (n * mod_inv(d, p)) % p;
}

}  // namespace

std::string PrimeAbove::label() const {
  if (index == 0) return "(" + std::to_string(p) + ")";
  return "p" + std::to_string(index) + "@" + std::to_string(p);
}

QuadField::QuadField(long D) : D_(D) {
  if (D % 4 == 1) {
    disc_ = D;
    wtr_ = 1;
    wnorm_ = (1 - D) / 4;
  } else {
    disc_ = 4 * D;
    wtr_ = 0;
    wnorm_ = -D;
  }
}

QuadField QuadField::make(long D) {
  if (D <= 1 || !squarefree(D)) fail(Err::Schema, "D must be squarefree and > 1");
  if (std::find(std::begin(kNarrowOne), std::end(kNarrowOne), D) == std::end(kNarrowOne))
    fail(Err::Schema, "field is not in the narrow-class-number-one whitelist");
  return QuadField(D);
}

QuadElem QuadField::sqrtD() const {
  if (D_ % 4 == 1) return {-1, 2};  // 2w - 1
  return {0, 1};
}

QuadElem QuadField::mul(const QuadElem& x, const QuadElem& y) const {
  // w^2 = tr(w) w - N(w)
  Rational bb = x.b * y.b;
  return {x.a * y.a - bb * wnorm_, x.a * y.b + x.b * y.a + bb * wtr_};
}

QuadElem QuadField::div(const QuadElem& x, const QuadElem& y) const {
  Rational n = norm(y);
  if (n == 0) fail(Err::DivisionByZero, "division by zero field element");
  QuadElem z = mul(x, conj(y));
  return {z.a / n, z.b / n};
}

QuadElem QuadField::pow(const QuadElem& x, long e) const {
  QuadElem acc = from_rational(1);
  QuadElem base = e < 0 ? div(from_rational(1), x) : x;
  for (long k = e < 0 ? -e : e; k > 0; k >>= 1) {
    if (k & 1) acc = mul(acc, base);
    if (k > 1) base = mul(base, base);
  }
  return acc;
}

bool QuadField::totally_positive(const QuadElem& x) const {
  // both embeddings > 0 iff trace > 0 and norm > 0
  return trace(x) > 0 && norm(x) > 0;
}

std::string QuadField::str(const QuadElem& x) const {
  std::ostringstream os;
  os << rat_str(x.a);
  if (x.b != 0) os << (x.b > 0 ? "+" : "") << rat_str(x.b) << "w";
  return os.str();
}

Splitting QuadField::splitting_type(long p) const {
  if (p < 2) fail(Err::Schema, "prime must be >= 2");
  if (disc_ % p == 0) return Splitting::Ramified;
  if (p == 2) {
    // X^2 - X + (1-D)/4 mod 2 splits iff (1-D)/4 is even, i.e. D = 1 mod 8
    return (D_ % 8 == 1) ? Splitting::Split : Splitting::Inert;
  }
  long d = ((disc_ % p) + p) % p;
  for (long r = 0; r < p; ++r)
    if ((r * r) % p == d) return Splitting::Split;
  return Splitting::Inert;
}

long QuadField::sqrtD_mod_p(long p) const {
  if (splitting_type(p) != Splitting::Split) fail(Err::WrongSplitting, "p is not split");
  long d = ((D_ % p) + p) % p;
  for (long r = 1; r < p; ++r)
    if ((r * r) % p == d) return std::min(r, p - r);
  fail(Err::Internal, "square root mod p not found for split prime");
}

long QuadField::split_residue(const QuadElem& xi, long p, int index) const {
  long r = sqrtD_mod_p(p);
  if (index == 2) r = p - r;
  // image of w: (1+r)/2 or r, depending on the basis
  long w = (D_ % 4 == 1) ? ((1 + r) % p) * mod_inv(2, p) % p : r;
  return (rat_mod_p(xi.a, p) + rat_mod_p(xi.b, p) * w) % p;
}

std::vector<QuadElem> QuadField::enumerate_totally_positive_by_trace(long n) const {
  std::vector<QuadElem> out;
  if (n <= 0) return out;
  // xi = a + b w, tr = 2a + b tr(w) = n; totally positive iff b^2 disc < n^2
  for (long b = -n; b <= n; ++b) {
    if (b * b * disc_ >= n * n) continue;
    long anum = n - b * wtr_;
    if (anum % 2 != 0) continue;
    out.push_back({Rational(anum / 2), Rational(b)});
  }
  return out;
}

std::vector<PrimeAbove> QuadField::primes_above(long p) const {
  Splitting s = splitting_type(p);
  if (s == Splitting::Ramified) fail(Err::WrongSplitting, "ramified primes are unsupported");
  std::vector<PrimeAbove> out;
  if (s == Splitting::Inert) {
    out.push_back({p, 0, from_rational(Rational(p)), Rational(p) * p});
    return out;
  }
  // canonical generator of p_1: minimal trace, then minimal second coordinate,
  // among totally positive elements of norm p in the iota_1 kernel
  for (long n = 1; n <= 16 * p + 64; ++n) {
    for (const QuadElem& xi : enumerate_totally_positive_by_trace(n)) {
      if (norm(xi) != p) continue;
      if (split_residue(xi, p, 1) != 0) continue;
      PrimeAbove p1{p, 1, xi, Rational(p)};
      // the complementary generator p / pi_1 makes V(pi_1)V(pi_2) = V(p) exact
      PrimeAbove p2{p, 2, div(from_rational(Rational(p)), xi), Rational(p)};
      out.push_back(p1);
      out.push_back(p2);
      return out;
    }
  }
  fail(Err::Internal, "no totally positive generator of norm p found");
}

long QuadField::ord_at(const QuadElem& xi, const PrimeAbove& pr) const {
  if (is_zero(xi)) fail(Err::ZeroElement, "valuation of zero element");
  if (!integral(xi)) fail(Err::Schema, "valuation of non-integral element");
  if (pr.index == 0) {
    // inert: p O_L is prime; xi in p^k O_L iff both coordinates divisible by p^k
    long va = xi.a == 0 ? 1L << 20 : rat_val(xi.a, pr.p);
    long vb = xi.b == 0 ? 1L << 20 : rat_val(xi.b, pr.p);
    return std::min(va, vb);
  }
  // split: divide out the canonical generator while staying integral
  long v = 0;
  QuadElem z = xi;
  for (;;) {
    QuadElem w = div(z, pr.pi);
    if (!integral(w)) break;
    z = w;
    ++v;
  }
  return v;
}

SplitEmbeddings::SplitEmbeddings(const QuadField& L, long p, long prec)
    : p_(p), prec_(prec), wtr_(L.gen_trace()) {
  if (L.splitting_type(p) != Splitting::Split)
    fail(Err::WrongSplitting, "embeddings require a split prime");
  if (prec < 1) fail(Err::Schema, "precision must be >= 1");
  // Newton-lift the canonical square root of D mod p to mod p^prec
  Integer pN = int_pow(Integer(p), static_cast<unsigned long>(prec));
  Integer x = L.sqrtD_mod_p(p);
  Integer D = L.D();
  for (int it = 0; it < 64; ++it) {
    Integer fx = (x * x - D) % pN;
    if (fx == 0) break;
    Integer dfx = (2 * x) % pN, dinv;
    if (mpz_invert(dinv.get_mpz_t(), dfx.get_mpz_t(), pN.get_mpz_t()) == 0)
      fail(Err::Internal, "even prime in square-root lift");
    x = ((x - fx * dinv) % pN + pN) % pN;
  }
  if ((x * x - D) % pN != 0) fail(Err::Internal, "square-root lift failed");
  PadicNum r = PadicNum::from_unit(p, 0, x, prec);
  PadicNum one = PadicNum::one(p, prec);
  PadicNum half = PadicNum::from_rational(rat(1, 2), p, prec);
  if (L.D() % 4 == 1) {
    w1_ = (one + r) * half;
    w2_ = (one - r) * half;
  } else {
    w1_ = r;
    w2_ = -r;
  }
}

PadicNum SplitEmbeddings::embed(const QuadElem& x, int index) const {
  if (index != 1 && index != 2) fail(Err::Schema, "embedding index must be 1 or 2");
  const PadicNum& w = index == 1 ? w1_ : w2_;
  PadicNum a = PadicNum::from_rational(x.a, p_, prec_);
  if (x.b == 0) return a;
  return a + PadicNum::from_rational(x.b, p_, prec_) * w;
}

PadicQuad quad_ext_embed(const QuadField& L, const QuadElem& x, long p, long prec) {
  if (p == 2) fail(Err::WrongSplitting, "p = 2 is rejected for the quadratic extension");
  if (L.splitting_type(p) != Splitting::Inert)
    fail(Err::WrongSplitting, "quadratic-extension embedding requires an inert prime");
  return PadicQuad(PadicNum::from_rational(x.a, p, prec), PadicNum::from_rational(x.b, p, prec),
                   L.gen_trace(), Integer(L.gen_norm()));
}

}  // namespace mf

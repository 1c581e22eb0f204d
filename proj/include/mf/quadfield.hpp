#pragma once
#include <string>
#include <vector>

#include "mf/padic.hpp"
#include "mf/rational.hpp"

namespace mf {

enum class Splitting { Split, Inert, Ramified };

// element a + b*w of L = Q(sqrt D), over the integral basis {1, w} with
// w = (1+sqrt D)/2 when D = 1 mod 4 and w = sqrt D otherwise
struct QuadElem {
  Rational a, b;
};

struct PrimeAbove {
  long p = 0;
  int index = 0;    // 1 or 2 for the two split primes, 0 for inert
  QuadElem pi;      // canonical totally positive generator; p itself when inert
  Rational nrm;     // absolute norm of the ideal: p (split) or p^2 (inert)
  std::string label() const;
};

// real quadratic field with narrow class number one (whitelisted D)
class QuadField {
 public:
  static QuadField make(long D);

  long D() const { return D_; }
  long disc() const { return disc_; }
  long gen_trace() const { return wtr_; }    // tr(w)
  long gen_norm() const { return wnorm_; }   // N(w)

  QuadElem from_rational(const Rational& r) const { return {r, 0}; }
  QuadElem omega() const { return {0, 1}; }
  QuadElem sqrtD() const;  // 2w - 1 or w, depending on the basis

  QuadElem add(const QuadElem& x, const QuadElem& y) const { return {x.a + y.a, x.b + y.b}; }
  QuadElem sub(const QuadElem& x, const QuadElem& y) const { return {x.a - y.a, x.b - y.b}; }
  QuadElem neg(const QuadElem& x) const { return {-x.a, -x.b}; }
  QuadElem mul(const QuadElem& x, const QuadElem& y) const;
  QuadElem div(const QuadElem& x, const QuadElem& y) const;
  QuadElem conj(const QuadElem& x) const { return {x.a + x.b * wtr_, -x.b}; }
  QuadElem pow(const QuadElem& x, long e) const;

  Rational trace(const QuadElem& x) const { return 2 * x.a + x.b * wtr_; }
  Rational norm(const QuadElem& x) const { return x.a * x.a + x.a * x.b * wtr_ + x.b * x.b * wnorm_; }
  bool is_zero(const QuadElem& x) const { return x.a == 0 && x.b == 0; }
  bool is_rational(const QuadElem& x) const { return x.b == 0; }
  bool equal(const QuadElem& x, const QuadElem& y) const { return x.a == y.a && x.b == y.b; }
  bool integral(const QuadElem& x) const { return x.a.get_den() == 1 && x.b.get_den() == 1; }
  // both real embeddings strictly positive (exact rational test)
  bool totally_positive(const QuadElem& x) const;

  std::string str(const QuadElem& x) const;

  Splitting splitting_type(long p) const;

  // all primes above p as canonical generators; split order is pinned to the
  // p-adic embedding choice (iota_1(pi_1) = 0 mod p); rejects ramified p
  std::vector<PrimeAbove> primes_above(long p) const;

  // valuation of integral nonzero xi at a prime above p
  long ord_at(const QuadElem& xi, const PrimeAbove& pr) const;

  // the xi in O_L with xi >> 0 and tr(xi) = n, ordered by second coordinate
  std::vector<QuadElem> enumerate_totally_positive_by_trace(long n) const;

  // canonical square root of D mod p used for iota_1 (split p only):
  // the lift r with r^2 = D mod p and 0 < r < p/2
  long sqrtD_mod_p(long p) const;

  // residue of integral xi in O_L/p_i = F_p (split p), in [0, p)
  long split_residue(const QuadElem& xi, long p, int index) const;

 private:
  explicit QuadField(long D);
  long D_ = 0, disc_ = 0, wtr_ = 0, wnorm_ = 0;
};

// the two p-adic embeddings of L for split p, to absolute precision N
class SplitEmbeddings {
 public:
  SplitEmbeddings(const QuadField& L, long p, long prec);
  // index 1 is the configured Theta-side embedding
  PadicNum embed(const QuadElem& x, int index) const;
  long prime() const { return p_; }
  long prec() const { return prec_; }

 private:
  long p_, prec_;
  long wtr_;
  PadicNum w1_, w2_;  // images of the basis generator under the two embeddings
};

// embedding of L into the unramified quadratic extension of Q_p for inert p;
// p odd and prime to D (ring homomorphism on the nose: same minimal polynomial)
PadicQuad quad_ext_embed(const QuadField& L, const QuadElem& x, long p, long prec);

}  // namespace mf

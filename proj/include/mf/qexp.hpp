#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mf/coeff.hpp"
#include "mf/quadfield.hpp"
#include "mf/weight.hpp"

namespace mf {

// q-expansion of an elliptic cusp form: finite map n -> a_n, complete for
// 1 <= n <= trunc; a_0 = 0 by the cusp convention
class EllipticQExp {
 public:
  EllipticQExp() = default;
  EllipticQExp(WeightData wt, long level, long trunc);

  const WeightData& weight() const { return wt_; }
  long level() const { return level_; }
  long trunc() const { return trunc_; }
  const std::map<long, Coeff>& coeffs() const { return c_; }

  void set(long n, Coeff v);
  Coeff at(long n) const;

  EllipticQExp with_weight(WeightData wt) const;
  EllipticQExp with_level(long level) const;
  EllipticQExp with_trunc(long trunc) const;  // can only shrink

 private:
  WeightData wt_;
  long level_ = 1, trunc_ = 0;
  std::map<long, Coeff> c_;
};

// q-expansion of a Hilbert cusp form over L (narrow class number one):
// finite map over totally positive integral xi with tr(xi) <= trunc.
// keys are (trace, second coordinate), which determine xi.
struct XiKey {
  long tr = 0, b = 0;
  auto operator<=>(const XiKey&) const = default;
};

class HilbertQExp {
 public:
  HilbertQExp() = default;
  HilbertQExp(QuadField L, WeightData wt, std::string level, long trunc);

  const QuadField& field() const { return L_; }
  const WeightData& weight() const { return wt_; }
  const std::string& level() const { return level_; }
  long trunc() const { return trunc_; }
  const std::map<XiKey, Coeff>& coeffs() const { return c_; }

  XiKey key_of(const QuadElem& xi) const;
  QuadElem xi_of(const XiKey& k) const;

  void set(const QuadElem& xi, Coeff v);
  void set_key(const XiKey& k, Coeff v);
  Coeff at(const QuadElem& xi) const;
  Coeff at_key(const XiKey& k) const;

  HilbertQExp with_weight(WeightData wt) const;
  HilbertQExp with_level(std::string level) const;
  HilbertQExp with_trunc(long trunc) const;  // can only shrink

 private:
  QuadField L_ = QuadField::make(5);
  WeightData wt_;
  std::string level_ = "1";
  long trunc_ = 0;
  std::map<XiKey, Coeff> c_;
};

// Hecke eigenvalue table for a fixture eigenform: prime label -> a(p) and
// the <p>_0-normalized central character values psi_0(p)
struct EigenData {
  std::string name;
  WeightData wt;
  long level = 1;                       // rational level (norm of the level ideal)
  std::map<std::string, Rational> ap;   // eigenvalues by prime label
  std::map<std::string, Rational> psi0; // character values by prime label

  const Rational& eig(const std::string& label) const;
  const Rational& chi(const std::string& label) const;
  bool has(const std::string& label) const { return ap.count(label) != 0; }
};

// ---------------------------------------------------------------------------
// shared p-adic working context for operators whose scalars leave Q
class OpContext {
 public:
  OpContext(const QuadField& L, long p, long prec);

  long p() const { return p_; }
  long prec() const { return prec_; }
  Splitting splitting() const { return split_; }
  const std::vector<PrimeAbove>& primes() const { return primes_; }
  const PrimeAbove& prime(int index) const;  // 1, 2 (split) or 0 (inert)
  const QuadField& field() const { return L_; }

  // iota_1(m)^e1 * iota_2(m)^e2 as a coefficient; stays rational whenever the
  // value is (m rational, or e1 = e2 so the product is a norm power)
  Coeff embed_power(const QuadElem& m, long e1, long e2) const;

 private:
  QuadField L_;
  long p_, prec_;
  Splitting split_;
  std::vector<PrimeAbove> primes_;
  std::optional<SplitEmbeddings> emb_;
};

// ---------------------------------------------------------------------------
// elliptic operators; v = 1 - w read from the input's weight metadata

EllipticQExp ell_zero_like(const EllipticQExp& f);
EllipticQExp ell_add(const EllipticQExp& f, const EllipticQExp& g);
EllipticQExp ell_sub(const EllipticQExp& f, const EllipticQExp& g);
EllipticQExp ell_scale(const EllipticQExp& f, const Coeff& s);
EllipticQExp ell_promote(const EllipticQExp& f, long p, long prec);

// a_n -> a_{n p^m}; output trunc floor(trunc/p^m)
EllipticQExp ell_U0(const EllipticQExp& f, long p, long m = 1, long min_out_trunc = 1);
// plain shift [p^m]: a_n -> a_{n/p^m}
EllipticQExp ell_plain_shift(const EllipticQExp& f, long p, long m = 1);
// V(p)^m = p^{-vm} [p^m]
EllipticQExp ell_V(const EllipticQExp& f, long p, long m = 1);
// U(p)^m = p^{vm} U0(p)^m (the T-normalized up-shift)
EllipticQExp ell_U(const EllipticQExp& f, long p, long m = 1, long min_out_trunc = 1);
// T0(q) for q prime to the level: a_n -> a_{nq} + q psi0(q) a_{n/q}
EllipticQExp ell_T0(const EllipticQExp& f, long q, const Rational& psi0_q,
                    long min_out_trunc = 1);
EllipticQExp ell_deplete(const EllipticQExp& f, long p);
// theta d^r: a_n -> n^r a_n; r < 0 requires p-depleted input
EllipticQExp ell_theta(const EllipticQExp& f, long r, long p);
// (1 - beta0 [p]) f
EllipticQExp ell_stabilize(const EllipticQExp& f, const Coeff& beta0, long p);
// central character retag by delta
EllipticQExp ell_retag(const EllipticQExp& f, long delta);

// T0(p) f == U0(p) f + p psi0(p) ([p] f after diamond) coefficientwise,
// with the two sides built through independent code paths
bool ell_hecke_identity_check(const EllipticQExp& f, long p, const Rational& psi0_p,
                              long agree_mod = 0);

// ---------------------------------------------------------------------------
// Hilbert operators; v_i = 1 - x_i read from the input's weight metadata

HilbertQExp hil_zero_like(const HilbertQExp& g);
HilbertQExp hil_add(const HilbertQExp& g, const HilbertQExp& h);
HilbertQExp hil_sub(const HilbertQExp& g, const HilbertQExp& h);
HilbertQExp hil_scale(const HilbertQExp& g, const Coeff& s);
HilbertQExp hil_promote(const HilbertQExp& g, long p, long prec);

HilbertQExp hil_U0(const HilbertQExp& g, const PrimeAbove& pr, long m = 1,
                   long min_out_trunc = 1);
HilbertQExp hil_plain_shift(const HilbertQExp& g, const PrimeAbove& pr, long m = 1);
HilbertQExp hil_V(const HilbertQExp& g, const OpContext& ctx, const PrimeAbove& pr, long m = 1);
HilbertQExp hil_U(const HilbertQExp& g, const OpContext& ctx, const PrimeAbove& pr, long m = 1,
                  long min_out_trunc = 1);
HilbertQExp hil_T0(const HilbertQExp& g, const PrimeAbove& q, const Rational& psi0_q,
                   long min_out_trunc = 1);
HilbertQExp hil_deplete(const HilbertQExp& g, const std::vector<PrimeAbove>& Q);
// theta d_nu with nu = (r1, r2) against the embeddings attached to ctx;
// negative r_i requires the support depleted at the i-th prime
HilbertQExp hil_theta(const HilbertQExp& g, const OpContext& ctx, long r1, long r2);
HilbertQExp hil_stabilize(const HilbertQExp& g, const Coeff& beta0, const PrimeAbove& pr);
HilbertQExp hil_retag(const HilbertQExp& g, long delta);

bool hil_hecke_identity_check(const HilbertQExp& g, const PrimeAbove& q,
                              const Rational& psi0_q, long agree_mod = 0);

// coefficientwise agreement up to the common trunc (exact when rational;
// mod p^k otherwise); weights must match
bool ell_agree(const EllipticQExp& f, const EllipticQExp& g, long k);
bool hil_agree(const HilbertQExp& f, const HilbertQExp& g, long k);

// sound output-trunc scans for the shift operators (exposed for tests)
long unshift_out_trunc(const QuadField& L, const QuadElem& pim, long in_trunc);
long shift_out_trunc(const QuadField& L, const QuadElem& pim, long in_trunc);

}  // namespace mf

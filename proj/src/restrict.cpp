#include "mf/restrict.hpp"

#include "mf/errors.hpp"

namespace mf {

EllipticQExp diagonal_restrict(const HilbertQExp& g, RestrictionReport* report) {
  const QuadField& L = g.field();
  const WeightData& w = g.weight();
  if (!w.is_hilbert) fail(Err::Schema, "diagonal restriction expects a Hilbert expansion");
  WeightData out_w = WeightData::elliptic(w.l1 + w.l2, w.x1 + w.x2);
  EllipticQExp out(out_w, 1, g.trunc());
  if (report) {
    report->in_trunc = g.trunc();
    report->out_trunc = g.trunc();
    report->constant = Rational(1);
    report->term_counts.assign(g.trunc() + 1, 0);
  }
  for (long n = 1; n <= g.trunc(); ++n) {
    std::vector<QuadElem> xs = L.enumerate_totally_positive_by_trace(n);
    if (report) report->term_counts[n] = static_cast<long>(xs.size());
    if (xs.empty()) continue;
    Coeff s = Coeff(Rational(0));
    bool any = false;
    for (const QuadElem& xi : xs) {
      Coeff c = g.at(xi);
      if (cis_exact_zero(c) && !any) continue;
      s = any ? cadd(s, c) : c;
      any = true;
    }
    if (any) out.set(n, s);
  }
  return out;
}

bool check_V_commutation(const HilbertQExp& g, long ell, long agree_mod) {
  const QuadField& L = g.field();
  OpContext ctx(L, ell, 8);  // scalar for a rational uniformizer never uses embeddings
  PrimeAbove ratp{ell, 0, L.from_rational(Rational(ell)), Rational(ell) * ell};
  EllipticQExp lhs = diagonal_restrict(hil_V(g, ctx, ratp, 1));
  EllipticQExp rv = ell_V(diagonal_restrict(g), ell, 1);
  EllipticQExp rhs = ell_scale(rv, Coeff(rat(1, ell)));
  long m = std::min(lhs.trunc(), rhs.trunc());
  return ell_agree(lhs.with_trunc(m), rhs.with_trunc(m), agree_mod);
}

bool check_thor_vanishing(const HilbertQExp& g, OpContext& ctx, int i, int j) {
  if (i < 1 || i > 2 || j < 1 || j > 2) fail(Err::Schema, "prime indices must be 1 or 2");
  HilbertQExp dep = hil_deplete(g, {ctx.prime(j)});
  HilbertQExp shifted = hil_V(dep, ctx, ctx.prime(i), 1);
  EllipticQExp e = diagonal_restrict(shifted);
  EllipticQExp u = ell_U0(e, ctx.p(), 1, 1);
  for (const auto& [n, c] : u.coeffs())
    if (!cvanishes(c)) return false;
  return true;
}

bool check_diamond_commutation(const HilbertQExp& g, const Coeff& lam_L, const Coeff& lam_Q,
                               long delta, long agree_mod) {
  EllipticQExp lhs = diagonal_restrict(hil_retag(hil_scale(g, lam_L), delta));
  EllipticQExp rhs = ell_retag(ell_scale(diagonal_restrict(g), lam_Q), 2 * delta);
  if (!(lhs.weight() == rhs.weight())) return false;
  return ell_agree(lhs, rhs, agree_mod);
}

}  // namespace mf

#pragma once

#include <vector>

#include "mf/qexp.hpp"

namespace mf {

// bookkeeping for one diagonal-restriction run. term_counts[n] is the number
// of totally positive trace-n lattice points that contributed (zero or not);
// `constant` is the global normalization applied to every term, fixed to 1
// under the narrow-class-number-one conventions of QuadField. Kept as a field
// so a future general-class-number extension has a single hook point.
struct RestrictionReport {
  long in_trunc = 0;
  long out_trunc = 0;
  Rational constant = Rational(1);
  std::vector<long> term_counts;  // indexed by n, entry 0 unused
};

// trace-sum restriction of a Hilbert expansion to an elliptic one:
// a_n = C * sum of a_xi over totally positive xi with tr(xi) = n.
// weight maps (l1, l2; x1, x2) -> (l1 + l2; x1 + x2); trunc is preserved.
EllipticQExp diagonal_restrict(const HilbertQExp& g, RestrictionReport* report = nullptr);

// restriction intertwines V at a rational prime ell (unramified in L) up to
// the scalar ell^{-1}: restrict(g|V(ell)) = ell^{-1} (restrict g)|V(ell).
// both sides are expanded independently; agree_mod bounds the p-adic
// comparison (0 = exact, rational coefficients only).
bool check_V_commutation(const HilbertQExp& g, long ell, long agree_mod = 0);

// vanishing of U0(p) restrict((deplete_j g)|V(w_i)) for i != j at a split
// prime; computed honestly with no special-casing. i = j generically gives a
// nonzero expansion, so the same evaluation falsifies the converse.
bool check_thor_vanishing(const HilbertQExp& g, OpContext& ctx, int i, int j);

// central-character action commutes with restriction: scaling by lam_L over L
// then restricting equals restricting then scaling by lam_Q, with the twist
// retag delta doubling on the elliptic side (norm of a rational z is z^2).
bool check_diamond_commutation(const HilbertQExp& g, const Coeff& lam_L, const Coeff& lam_Q,
                               long delta = 0, long agree_mod = 0);

}  // namespace mf

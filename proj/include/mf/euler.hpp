#pragma once

#include <vector>

#include "mf/qexp.hpp"

namespace mf {

// rescaled Satake pair at one place: the two roots of the stored Hecke
// polynomial X^2 - eig X + N(place) psi0(place). Each root is
// q^{rescale_power/2} times a unitary parameter (power 1 at elliptic and
// split-Hilbert places, 2 at inert-Hilbert places), so every identity we
// compute stays polynomial and no square root is ever extracted.
struct SatakePair {
  Coeff c1, c2;
  long q = 0;
  int rescale_power = 1;
};

// local datum for one degree-8 factor at a rational place. For a split place
// both pairs over L are present; for an inert place only chi_a. The stored
// values are whatever normalization the caller chose: the product formulas
// and the matrix are polynomial in them.
struct SatakeParams {
  Splitting type = Splitting::Split;
  long q = 0;
  SatakePair chi_a, chi_b;  // chi_b ignored when inert
  SatakePair psi;
};

struct SplitEuler {
  Coeff E;
  Coeff E0;
};

// one assembled local Euler datum: the adjoint factor E(f*), the local E and
// E0 (E0 = 1 at inert places), and prefactor = E / (E(f*) E0) as it enters
// the interpolation formula. A vanishing E0 or adjoint is a pole of the
// ratio and is signalled as ZeroDenominator.
struct EulerReport {
  Splitting type = Splitting::Split;
  long q = 0;
  Coeff adjoint, E, E0, prefactor;
};

// roots = {alpha_g, beta_g} (inert) or {alpha_1, beta_1, alpha_2, beta_2}
// (split)
EulerReport assemble_euler(Splitting type, const std::vector<Coeff>& roots, const Coeff& alpha_f,
                           const Coeff& beta_f, long q);

// (1 - alpha_g alpha_f^{-1} q^{-1})(1 - beta_g alpha_f^{-1} q^{-1});
// alpha_f must be a q-unit
Coeff euler_inert(const Coeff& alpha_g, const Coeff& beta_g, const Coeff& alpha_f, long q);

// E  = prod over pairs (r, s) in {a1,b1} x {a2,b2} of (1 - r s alpha_f^{-1} q^{-1})
// E0 = 1 - a1 b1 a2 b2 (alpha_f^{-1} q^{-1})^2
SplitEuler euler_split(const Coeff& a1, const Coeff& b1, const Coeff& a2, const Coeff& b2,
                       const Coeff& alpha_f, long q);

// E(f*) = 1 - beta alpha^{-1}
Coeff euler_adjoint(const Coeff& alpha_f, const Coeff& beta_f);

// degree-8 local factor as the coefficient list of a polynomial in X = q^{-s}
// (constant term first), computed from the displayed products
std::vector<Coeff> local_Lfactor_split(const SatakeParams& S);
std::vector<Coeff> local_Lfactor_inert(const SatakeParams& S);

// the 8x8 representation matrix r(C_v), row-major. split: Kronecker cube of
// the three diagonal Satake matrices. inert: the Galois-twisted block form
// (a 4x4 permutation-twisted factor for the two conjugate GL2 components,
// tensored with the elliptic diagonal), written out verbatim, not re-derived.
std::vector<Coeff> r_matrix_split(const SatakeParams& S);
std::vector<Coeff> r_matrix_inert(const SatakeParams& S);

// invert the Satake-Hecke relation at one place: both roots of
// X^2 - eig X + n_psi0, unordered. A rational square discriminant gives an
// exact pair; otherwise with padic_prec > 0 and eig a q-unit the ordinary
// Hensel factorization gives the pair; anything else errors.
SatakePair satake_from_hecke(const Rational& eig, const Rational& n_psi0, long q,
                             int rescale_power, long padic_prec = 0);

// convenience lookup from an eigenvalue table at a prime of L
SatakePair satake_from_hecke(const EigenData& ed, const PrimeAbove& pr, long padic_prec = 0);

}  // namespace mf

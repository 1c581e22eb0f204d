#include "mf/euler.hpp"

#include "mf/errors.hpp"

namespace mf {

namespace {

void require_unit(const Coeff& alpha_f, long q) {
  if (const auto* r = std::get_if<Rational>(&alpha_f)) {
    if (*r == 0 || rat_val(*r, q) != 0)
      fail(Err::NotOrdinary, "alpha_f must be a unit at the place");
    return;
  }
  if (const auto* x = std::get_if<PadicNum>(&alpha_f)) {
    if (x->vanishes() || x->val() != 0)
      fail(Err::NotOrdinary, "alpha_f must be a unit at the place");
    return;
  }
  fail(Err::RingMismatch, "alpha_f must be rational or p-adic");
}

Coeff one() { return Coeff(Rational(1)); }

}  // namespace

Coeff euler_inert(const Coeff& alpha_g, const Coeff& beta_g, const Coeff& alpha_f, long q) {
  require_unit(alpha_f, q);
  Coeff c = cdiv(Coeff(rat(1, q)), alpha_f);
  Coeff f1 = csub(one(), cmul(alpha_g, c));
  Coeff f2 = csub(one(), cmul(beta_g, c));
  return cmul(f1, f2);
}

SplitEuler euler_split(const Coeff& a1, const Coeff& b1, const Coeff& a2, const Coeff& b2,
                       const Coeff& alpha_f, long q) {
  require_unit(alpha_f, q);
  Coeff c = cdiv(Coeff(rat(1, q)), alpha_f);
  SplitEuler out;
  out.E = one();
  for (const Coeff* r : {&a1, &b1})
    for (const Coeff* s : {&a2, &b2})
      out.E = cmul(out.E, csub(one(), cmul(cmul(*r, *s), c)));
  Coeff prod = cmul(cmul(a1, b1), cmul(a2, b2));
  out.E0 = csub(one(), cmul(prod, cmul(c, c)));
  return out;
}

Coeff euler_adjoint(const Coeff& alpha_f, const Coeff& beta_f) {
  if (const auto* r = std::get_if<Rational>(&alpha_f))
    if (*r == 0) fail(Err::NotOrdinary, "alpha_f must be invertible");
  return csub(one(), cdiv(beta_f, alpha_f));
}

EulerReport assemble_euler(Splitting type, const std::vector<Coeff>& roots, const Coeff& alpha_f,
                           const Coeff& beta_f, long q) {
  EulerReport rep;
  rep.type = type;
  rep.q = q;
  rep.adjoint = euler_adjoint(alpha_f, beta_f);
  if (type == Splitting::Inert) {
    if (roots.size() != 2) fail(Err::Schema, "inert place takes two roots");
    rep.E = euler_inert(roots[0], roots[1], alpha_f, q);
    rep.E0 = one();
  } else if (type == Splitting::Split) {
    if (roots.size() != 4) fail(Err::Schema, "split place takes four roots");
    SplitEuler se = euler_split(roots[0], roots[1], roots[2], roots[3], alpha_f, q);
    rep.E = se.E;
    rep.E0 = se.E0;
  } else {
    fail(Err::WrongSplitting, "no Euler factor at ramified places");
  }
  if (cvanishes(rep.E0)) fail(Err::ZeroDenominator, "pole: E0 vanishes");
  if (cvanishes(rep.adjoint)) fail(Err::ZeroDenominator, "pole: adjoint factor vanishes");
  rep.prefactor = cdiv(rep.E, cmul(rep.adjoint, rep.E0));
  return rep;
}

std::vector<Coeff> local_Lfactor_split(const SatakeParams& S) {
  // prod over i, j, k of (1 - chi_i chi'_j psi_k X): multiply the eight
  // linear factors
  std::vector<Coeff> out{one()};
  for (const Coeff* ci : {&S.chi_a.c1, &S.chi_a.c2})
    for (const Coeff* cj : {&S.chi_b.c1, &S.chi_b.c2})
      for (const Coeff* pk : {&S.psi.c1, &S.psi.c2}) {
        Coeff root = cmul(cmul(*ci, *cj), *pk);
        std::vector<Coeff> next(out.size() + 1, Coeff(Rational(0)));
        for (size_t t = 0; t < out.size(); ++t) {
          next[t] = cadd(next[t], out[t]);
          next[t + 1] = csub(next[t + 1], cmul(root, out[t]));
        }
        out = std::move(next);
      }
  return out;
}

std::vector<Coeff> local_Lfactor_inert(const SatakeParams& S) {
  const Coeff &x1 = S.chi_a.c1, &x2 = S.chi_a.c2, &p1 = S.psi.c1, &p2 = S.psi.c2;
  // quartic piece: 1 - x1 x2 (p1^2 + p2^2) X^2 + (x1 x2 p1 p2)^2 X^4
  Coeff x12 = cmul(x1, x2);
  Coeff psq = cadd(cmul(p1, p1), cmul(p2, p2));
  Coeff prod = cmul(x12, cmul(p1, p2));
  std::vector<Coeff> out(9, Coeff(Rational(0)));
  std::vector<Coeff> quart{one(), Coeff(Rational(0)), cneg(cmul(x12, psq)), Coeff(Rational(0)),
                           cmul(prod, prod)};
  // linear pieces: prod over i, j of (1 - x_i p_j X)
  std::vector<Coeff> lin{one()};
  for (const Coeff* xi : {&x1, &x2})
    for (const Coeff* pj : {&p1, &p2}) {
      Coeff root = cmul(*xi, *pj);
      std::vector<Coeff> next(lin.size() + 1, Coeff(Rational(0)));
      for (size_t t = 0; t < lin.size(); ++t) {
        next[t] = cadd(next[t], lin[t]);
        next[t + 1] = csub(next[t + 1], cmul(root, lin[t]));
      }
      lin = std::move(next);
    }
  for (size_t i = 0; i < quart.size(); ++i)
    for (size_t j = 0; j < lin.size(); ++j) out[i + j] = cadd(out[i + j], cmul(quart[i], lin[j]));
  return out;
}

std::vector<Coeff> r_matrix_split(const SatakeParams& S) {
  // Kronecker product of diag(c1, c2) x diag(c1', c2') x diag(s1, s2)
  const Coeff* a[2] = {&S.chi_a.c1, &S.chi_a.c2};
  const Coeff* b[2] = {&S.chi_b.c1, &S.chi_b.c2};
  const Coeff* c[2] = {&S.psi.c1, &S.psi.c2};
  std::vector<Coeff> m(64, Coeff(Rational(0)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        int d = 4 * i + 2 * j + k;
        m[8 * d + d] = cmul(cmul(*a[i], *b[j]), *c[k]);
      }
  return m;
}

std::vector<Coeff> r_matrix_inert(const SatakeParams& S) {
  const Coeff &x1 = S.chi_a.c1, &x2 = S.chi_a.c2;
  // the displayed 4x4 block:
  //   [ x1  0   0   0 ]
  //   [ 0   0   x1  0 ]
  //   [ 0   x2  0   0 ]
  //   [ 0   0   0   x2 ]
  Coeff z = Coeff(Rational(0));
  Coeff A[4][4] = {{x1, z, z, z}, {z, z, x1, z}, {z, x2, z, z}, {z, z, z, x2}};
  const Coeff* B[2] = {&S.psi.c1, &S.psi.c2};
  std::vector<Coeff> m(64, Coeff(Rational(0)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 2; ++k)
        m[8 * (2 * i + k) + (2 * j + k)] = cmul(A[i][j], *B[k]);
  return m;
}

SatakePair satake_from_hecke(const Rational& eig, const Rational& n_psi0, long q,
                             int rescale_power, long padic_prec) {
  SatakePair out;
  out.q = q;
  out.rescale_power = rescale_power;
  // discriminant of X^2 - eig X + n_psi0
  Rational disc = eig * eig - 4 * n_psi0;
  Rational root;
  bool square = false;
  if (disc >= 0) {
    Integer num = disc.get_num(), den = disc.get_den();
    Integer rn = sqrt(num), rd = sqrt(den);
    if (rn * rn == num && rd * rd == den) {
      square = true;
      root = Rational(rn) / Rational(rd);
    }
  }
  if (square) {
    out.c1 = Coeff((eig + root) / 2);
    out.c2 = Coeff((eig - root) / 2);
    return out;
  }
  if (padic_prec <= 0)
    fail(Err::Indistinguishable,
         "irrational Satake pair: supply a p-adic precision for the ordinary lift");
  HenselRoots hr = hensel_ordinary_root(eig, n_psi0, q, padic_prec);
  out.c1 = Coeff(hr.alpha);
  out.c2 = Coeff(hr.beta);
  return out;
}

SatakePair satake_from_hecke(const EigenData& ed, const PrimeAbove& pr, long padic_prec) {
  const Rational& a = ed.eig(pr.label());
  const Rational& psi = ed.chi(pr.label());
  int rescale = pr.index == 0 ? 2 : 1;
  return satake_from_hecke(a, pr.nrm * psi, pr.p, rescale, padic_prec);
}

}  // namespace mf

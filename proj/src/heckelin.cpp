#include "mf/heckelin.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "mf/errors.hpp"

namespace mf {

namespace {

std::vector<std::pair<long, long>> factorize(long n) {
  std::vector<std::pair<long, long>> out;
  for (long q = 2; q * q <= n; ++q) {
    if (n % q) continue;
    long e = 0;
    while (n % q == 0) n /= q, ++e;
    out.emplace_back(q, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

bool is_prime(long n) {
  if (n < 2) return false;
  for (long q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

long parse_prime_label(const std::string& lab) {
  if (lab.empty() || lab.find_first_not_of("0123456789") != std::string::npos)
    fail(Err::Schema, "basis labels must be rational primes, got \"" + lab + "\"");
  long q = std::stol(lab);
  if (!is_prime(q)) fail(Err::Schema, "basis label " + lab + " is not prime");
  return q;
}

// plain shift by a composite index: fold the prime-power shifts
EllipticQExp shift_by(const EllipticQExp& f, long m) {
  if (m < 1) fail(Err::Schema, "shift index must be positive");
  EllipticQExp out = f;
  for (const auto& [q, e] : factorize(m)) out = ell_plain_shift(out, q, e);
  return out;
}

// residual coefficients: exact zero when rational, mod p^floor when p-adic
// (floor 0 falls back to the stored precision)
bool residual_ok(const Coeff& c, long floor_mod) {
  if (c.index() == 0) return std::get<Rational>(c) == 0;
  if (floor_mod > 0) return cagree(c, Coeff(Rational(0)), floor_mod);
  return cvanishes(c);
}

// the space's operator at the label: U0 below the level, T0 elsewhere
EllipticQExp apply_hecke_at(const EllipticQExp& w, long space_level, long q,
                            const EigenData& chi_source) {
  if (space_level % q == 0) return ell_U0(w, q, 1, 1);
  return ell_T0(w, q, chi_source.chi(std::to_string(q)), 1);
}

// the raw projector product, without the span-membership check
EllipticQExp project_one(const EllipticQExp& v, const EigenBasis& basis, int t) {
  EllipticQExp w = v;
  for (int j = 0; j < basis.size(); ++j) {
    if (j == t) continue;
    const std::string& lab = basis.dist_label(std::min(t, j), std::max(t, j));
    const Rational& lt = basis.systems[t].eig(lab);
    const Rational& lj = basis.systems[j].eig(lab);
    if (lt == lj)
      fail(Err::IndistinguishableSystems,
           "recorded prime " + lab + " does not separate the systems");
    long q = parse_prime_label(lab);
    EllipticQExp tw = apply_hecke_at(w, basis.level, q, basis.systems[t]);
    w = ell_scale(ell_sub(tw, ell_scale(w, Coeff(lj))), Coeff(Rational(1) / (lt - lj)));
  }
  return w;
}

}  // namespace

int EigenBasis::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (systems[i].name == name) return i;
  fail(Err::Schema, "no eigen-system named " + name + " in the basis");
}

const std::string& EigenBasis::dist_label(int i, int j) const {
  auto it = dist.find({std::min(i, j), std::max(i, j)});
  if (it == dist.end())
    fail(Err::IndistinguishableSystems, "no distinguishing prime recorded for systems " +
                                            std::to_string(i) + ", " + std::to_string(j));
  return it->second;
}

const Rational& GramRatios::at(long a1, long a2) const {
  auto it = r.find({a1, a2});
  if (it == r.end())
    fail(Err::Schema, "no gram ratio stored at (" + std::to_string(a1) + ", " +
                          std::to_string(a2) + ")");
  return it->second;
}

EllipticQExp eigen_expansion(const EigenData& f, long trunc) {
  if (f.wt.is_hilbert) fail(Err::Schema, "eigen expansion needs an elliptic table");
  if (trunc < 1) fail(Err::Schema, "eigen expansion needs a positive trunc");
  EllipticQExp out(f.wt, f.level, trunc);
  std::map<long, std::vector<Rational>> pp;  // q -> a_{q^0}, a_{q^1}, ...
  for (long n = 1; n <= trunc; ++n) {
    Rational an = 1;
    for (const auto& [q, e] : factorize(n)) {
      std::vector<Rational>& tab = pp[q];
      if (tab.empty()) {
        std::string lab = std::to_string(q);
        if (!f.has(lab))
          fail(Err::MissingEigenvalue, "eigen-table has no entry at " + lab);
        tab = {Rational(1), f.eig(lab)};
      }
      while (static_cast<long>(tab.size()) <= e) {
        size_t i = tab.size() - 1;
        Rational next = tab[1] * tab[i];
        if (f.level % q != 0) next -= Rational(q) * f.chi(std::to_string(q)) * tab[i - 1];
        tab.push_back(next);
      }
      an *= tab[e];
    }
    out.set(n, Coeff(an));
  }
  return out;
}

namespace {

Rational ratio_rec(const EigenData& f, long a1, long a2) {
  if (a1 == 1 && a2 == 1) return 1;
  long g = std::gcd(a1, a2);
  if (g > 1) {
    // a common shift cancels in the pairing
    long q = factorize(g).front().first;
    return ratio_rec(f, a1 / q, a2 / q);
  }
  if (a2 == 1) return ratio_rec(f, a2, a1);  // the pairing is symmetric here
  long q = factorize(a2).front().first;
  std::string lab = std::to_string(q);
  if (!f.has(lab))
    fail(Err::RecursionStuck, "peeling " + lab + " needs its eigenvalue in the table");
  Rational den = (f.level % q == 0) ? Rational(q) : Rational(q + 1);
  return f.eig(lab) / den * ratio_rec(f, a1, a2 / q);
}

}  // namespace

Rational petersson_ratio(const EigenData& f, long a1, long a2, long M) {
  if (f.level < 1 || M < 1 || M % f.level != 0)
    fail(Err::Schema, "M must be a positive multiple of the level");
  long D = M / f.level;
  for (const auto& [q, e] : factorize(D))
    if (e > 1) fail(Err::Schema, "M / level must be squarefree");
  if (a1 < 1 || a2 < 1 || D % a1 != 0 || D % a2 != 0)
    fail(Err::Schema, "shift ideals must divide M / level");
  return ratio_rec(f, a1, a2);
}

GramRatios build_gram_ratios(const EigenData& f, long M) {
  GramRatios g;
  g.M = M;
  g.level = f.level;
  // the divisor scan doubles as the precondition check via petersson_ratio
  long D = (f.level >= 1 && M >= 1 && M % f.level == 0) ? M / f.level : 0;
  for (long d = 1; d <= D; ++d)
    if (D % d == 0) g.divisors.push_back(d);
  if (g.divisors.empty()) fail(Err::Schema, "M must be a positive multiple of the level");
  for (long a1 : g.divisors)
    for (long a2 : g.divisors) g.r[{a1, a2}] = petersson_ratio(f, a1, a2, M);
  return g;
}

bool validate_eigen_basis(const EigenBasis& basis, long agree_mod) {
  if (basis.systems.size() != basis.forms.size())
    fail(Err::Schema, "systems and forms must align");
  if (basis.size() == 0) fail(Err::Schema, "empty basis");
  for (int i = 0; i < basis.size(); ++i) {
    const EigenData& sys = basis.systems[i];
    if (sys.level != basis.level) fail(Err::Schema, "system level must match the space");
    for (const auto& [lab, a] : sys.ap) {
      long q = parse_prime_label(lab);
      EllipticQExp lhs = apply_hecke_at(basis.forms[i], basis.level, q, sys);
      if (!ell_agree(lhs, ell_scale(basis.forms[i], Coeff(a)), agree_mod)) return false;
    }
  }
  for (int i = 0; i < basis.size(); ++i)
    for (int j = i + 1; j < basis.size(); ++j) {
      const std::string& lab = basis.dist_label(i, j);
      if (basis.systems[i].eig(lab) == basis.systems[j].eig(lab)) return false;
      // one space, one central character: overlapping table entries must match
      for (const auto& [l2, x] : basis.systems[i].psi0) {
        auto it = basis.systems[j].psi0.find(l2);
        if (it != basis.systems[j].psi0.end() && it->second != x) return false;
      }
    }
  return true;
}

EllipticQExp isotypic_project(const EllipticQExp& v, const EigenBasis& basis,
                              const std::string& target, long floor_mod) {
  int t = basis.index_of(target);
  // span membership cannot be read off the raw projector images alone: with a
  // single shared distinguishing prime their sum is the Lagrange interpolation
  // of the constant 1, so it reassembles any input. Instead extract each
  // coordinate from the leading coefficient of the projector image and check
  // the reconstruction against the basis forms themselves.
  std::vector<Coeff> coord;
  std::optional<EllipticQExp> recon;
  for (int i = 0; i < basis.size(); ++i) {
    if (basis.forms[i].trunc() < 1 || cis_exact_zero(basis.forms[i].at(1)))
      fail(Err::Schema, "basis forms must have a unit leading coefficient");
    EllipticQExp pi = project_one(v, basis, i);
    Coeff ci = cdiv(pi.at(1), basis.forms[i].at(1));
    coord.push_back(ci);
    EllipticQExp term = ell_scale(basis.forms[i], ci);
    recon = recon ? ell_add(*recon, term) : term;
  }
  EllipticQExp residual = ell_sub(v, *recon);
  for (const auto& [n, c] : residual.coeffs())
    if (!residual_ok(c, floor_mod))
      fail(Err::NotInSpan,
           "basis reconstruction misses the input at q^" + std::to_string(n));
  // membership verified, so the projection is the coordinate times the basis
  // form, certified on the common window rather than the operator-shrunk one
  EllipticQExp out = ell_scale(basis.forms[t], coord[t]);
  if (out.trunc() > v.trunc()) out = out.with_trunc(v.trunc());
  return out;
}

EllipticQExp nearly_ordinary_project(const EllipticQExp& v, const EigenBasis& basis, long p,
                                     OrdinaryMode mode, long budget, long floor_mod) {
  if (p < 2 || basis.level % p != 0)
    fail(Err::Schema, "nearly-ordinary projection needs p in the space level");
  std::string plab = std::to_string(p);
  std::vector<int> unit;
  for (int i = 0; i < basis.size(); ++i) {
    const Rational& a = basis.systems[i].eig(plab);
    if (a == 0) continue;  // infinite valuation: killed
    long val = rat_val(a, p);
    if (val < 0) fail(Err::Schema, "U0-eigenvalue with negative valuation at " + plab);
    if (val == 0) unit.push_back(i);
  }
  if (mode == OrdinaryMode::Eigen) {
    std::optional<EllipticQExp> acc;
    for (int i : unit) {
      EllipticQExp pi = isotypic_project(v, basis, basis.systems[i].name, floor_mod);
      acc = acc ? ell_add(*acc, pi) : pi;
    }
    if (!acc) return ell_scale(v, Coeff(Rational(0)));
    return *acc;
  }
  if (unit.size() != 1)
    fail(Err::Schema, "iteration mode needs exactly one unit eigen-system");
  if (budget < 1) fail(Err::Schema, "iteration mode needs a positive budget");
  Coeff inv_alpha = Coeff(Rational(1) / basis.systems[unit[0]].eig(plab));
  EllipticQExp w = v;
  for (long k = 0; k < budget; ++k) w = ell_scale(ell_U0(w, p, 1, 1), inv_alpha);
  return w;
}

std::map<long, Coeff> span_coordinates(const EllipticQExp& h, const EllipticQExp& f,
                                       const std::vector<long>& divisors, long floor_mod) {
  if (divisors.empty()) fail(Err::Schema, "empty divisor list");
  std::vector<long> ds = divisors;
  std::sort(ds.begin(), ds.end());
  if (ds.front() < 1 || std::adjacent_find(ds.begin(), ds.end()) != ds.end())
    fail(Err::Schema, "divisors must be distinct positive integers");
  if (!(h.weight() == f.weight()))
    fail(Err::Schema, "weight mismatch against the spanning form");
  if (f.trunc() < 1 || cis_exact_zero(f.at(1)))
    fail(Err::Schema, "spanning form must have a unit leading coefficient");
  EllipticQExp res = h;
  std::map<long, Coeff> out;
  for (long m : ds) {
    if (m > res.trunc())
      fail(Err::InsufficientTruncation,
           "coordinate at index " + std::to_string(m) + " is beyond the certified window");
    Coeff cm = cdiv(res.at(m), f.at(1));
    out[m] = cm;
    if (!cis_exact_zero(cm)) res = ell_sub(res, ell_scale(shift_by(f, m), cm));
  }
  for (const auto& [n, c] : res.coeffs())
    if (!residual_ok(c, floor_mod))
      fail(Err::NotInSpan, "residual at q^" + std::to_string(n) +
                               " after removing every spanned component");
  return out;
}

Coeff evaluate_J(const EllipticQExp& H, const std::map<long, Coeff>& test_vector,
                 const EigenData& f, const GramRatios& gram, long floor_mod) {
  EllipticQExp fx = eigen_expansion(f, H.trunc());
  std::map<long, Coeff> hc = span_coordinates(H, fx, gram.divisors, floor_mod);
  Coeff J = Coeff(Rational(0));
  bool any = false;
  for (const auto& [a, ca] : hc) {
    if (cis_exact_zero(ca)) continue;
    for (const auto& [b, cb] : test_vector) {
      if (cis_exact_zero(cb)) continue;
      Coeff term = cmul(cmul(ca, cb), Coeff(gram.at(a, b)));
      J = any ? cadd(J, term) : term;
      any = true;
    }
  }
  return J;
}

}  // namespace mf

#pragma once
// finite-dimensional Hecke linear algebra on fixture-described spaces:
// Petersson ratio calculus, isotypic and nearly-ordinary projections, and the
// pairing-quotient evaluation used by the value assembly. Conjugation in the
// pairing is the identity throughout: fixtures carry rational eigenvalue
// tables, and test-vector coordinates are supplied already conjugated.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mf/qexp.hpp"

namespace mf {

// a Hecke-stable space described by its eigen-systems: aligned eigenvalue
// tables and q-expansions, plus for each pair of systems a prime label where
// their eigenvalues differ. The operator attached to a label q is U0(q) when
// q divides the space level and T0(q) otherwise; every table is expected to
// record eigenvalues for that convention, so each system's level must equal
// the space level.
struct EigenBasis {
  long level = 1;
  std::vector<EigenData> systems;
  std::vector<EllipticQExp> forms;
  // (i, j) with i < j -> distinguishing prime label
  std::map<std::pair<int, int>, std::string> dist;

  int size() const { return static_cast<int>(systems.size()); }
  int index_of(const std::string& name) const;         // Schema if absent
  const std::string& dist_label(int i, int j) const;   // IndistinguishableSystems if absent
};

// pairwise pairing ratios <f|[a1], f|[a2]> / <f, f> over the divisors of
// M / level; keys are the positive generators of the shift ideals
struct GramRatios {
  long M = 1, level = 1;
  std::vector<long> divisors;                   // of M/level, ascending, incl. 1
  std::map<std::pair<long, long>, Rational> r;  // complete on divisors x divisors

  const Rational& at(long a1, long a2) const;   // Schema if absent
};

// expansion of an eigen-table by the Hecke recursion: a_1 = 1, a_q from the
// table, prime powers via a_{q^{i+1}} = a_q a_{q^i} - q psi0(q) a_{q^{i-1}}
// for q coprime to the level (plain powers of a_q when q divides it), and
// multiplicative across coprime indices. MissingEigenvalue when a prime
// needed below trunc is absent from the table.
EllipticQExp eigen_expansion(const EigenData& f, long trunc);

// <f|[a1], f|[a2]> / <f, f> by the shift-pairing recursion: a common prime
// divisor of both slots cancels, and peeling a prime q off one slot costs
// a_q/(q+1) for q coprime to the level, a_q/q for q dividing it. a1 and a2
// must divide M/level, which must be squarefree. RecursionStuck when a
// needed eigenvalue is missing from the table.
Rational petersson_ratio(const EigenData& f, long a1, long a2, long M);

// every pairwise ratio over the divisors of M/level
GramRatios build_gram_ratios(const EigenData& f, long M);

// the recorded eigen-systems are pairwise separated at their distinguishing
// primes, share the central character where their tables overlap, and each
// form is a simultaneous eigenvector to its trunc for every table prime
bool validate_eigen_basis(const EigenBasis& basis, long agree_mod = 0);

// projection of v onto the target eigen-system: the product over the other
// systems g of (T_q - lambda_g)/(lambda_target - lambda_g) at the recorded
// distinguishing primes. v must lie in the span of the recorded systems:
// each coordinate is read off the leading coefficient of its projector
// image, and the reconstruction from the basis forms must match v up to a
// residual that vanishes (exactly when rational, mod p^floor_mod when
// p-adic; floor_mod 0 means to stored precision), else NotInSpan. The
// verified membership lets the result be certified on the common window of
// v and the basis form rather than the operator-shrunk one.
EllipticQExp isotypic_project(const EllipticQExp& v, const EigenBasis& basis,
                              const std::string& target, long floor_mod = 0);

// nearly-ordinary projection with respect to a basis of p-stabilizations:
// keeps the components whose U0(p)-eigenvalue is a p-adic unit, kills those
// with positive valuation. Eigen mode sums the isotypic projections onto the
// unit systems; Iterate mode runs alpha0^{-budget} U0(p)^budget (requires a
// unique unit system) and agrees with Eigen mode to budget times the least
// positive eigenvalue valuation.
enum class OrdinaryMode { Eigen, Iterate };
EllipticQExp nearly_ordinary_project(const EllipticQExp& v, const EigenBasis& basis, long p,
                                     OrdinaryMode mode = OrdinaryMode::Eigen, long budget = 0,
                                     long floor_mod = 0);

// coordinates of h in the span {f|[m] : m in divisors}: triangular solve by
// ascending divisor against the unit leading coefficient of f; the residual
// after removing every component must vanish as in isotypic_project, else
// NotInSpan. InsufficientTruncation when a coordinate position is beyond
// h's certified window.
std::map<long, Coeff> span_coordinates(const EllipticQExp& h, const EllipticQExp& f,
                                       const std::vector<long>& divisors, long floor_mod = 0);

// J(H, F) = <H, F> / <f, f>: expand H over the {f|[m]} span of gram's
// divisors and contract with the test-vector coordinates of F through the
// Gram ratios. H must already be f-isotypic (project first if not).
Coeff evaluate_J(const EllipticQExp& H, const std::map<long, Coeff>& test_vector,
                 const EigenData& f, const GramRatios& gram, long floor_mod = 0);

}  // namespace mf

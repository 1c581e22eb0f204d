#pragma once

#include <map>
#include <string>
#include <vector>

#include "mf/qexp.hpp"

namespace mf {

// one stored form: an exact-rational expansion plus its eigen table.
// kind "elliptic" keys coefficients by the index n; kind "hilbert" keys them
// by the standard representative (trace, second coordinate) over the real
// quadratic field with squarefree datum D. every number in the wire format
// is an exact rational string; nothing is ever stored as a float.
struct FormFixture {
  int schema = 1;
  std::string name;
  std::string kind;  // "elliptic" | "hilbert"
  long D = 0;        // 0 for rational fixtures
  std::string role;  // optional: "g" | "target" | "ambient" for pipeline files
  WeightData wt{};
  long level = 1;
  long trunc = 0;
  bool normalized = true;   // a(1) = 1 and the table-vs-coefficient check apply
  bool conjugated = false;  // tabulated after the nontrivial automorphism
  std::map<long, Rational> ecoeffs;
  std::map<XiKey, Rational> hcoeffs;
  std::map<std::string, Rational> ap;
  std::map<std::string, Rational> psi0;

  EigenData table() const;
  EllipticQExp elliptic() const;                  // Schema unless kind matches
  HilbertQExp hilbert(const QuadField& L) const;  // Schema unless kind/field match
};

// line-oriented wire format: one JSON object per line, tagged schema 1
std::string fixture_to_json(const FormFixture& fx);
FormFixture fixture_from_json(const std::string& line);
std::vector<FormFixture> load_fixtures(const std::string& path);
void save_fixtures(const std::string& path, const std::vector<FormFixture>& v);

// coherence of a loaded fixture: weights legal, coefficient keys canonical
// and inside the window, and for normalized fixtures a(1) = 1 plus agreement
// of every table eigenvalue with the stored coefficient at the canonical
// generator of its prime whenever that generator is inside the window.
// Schema errors name the offending coefficient.
void validate_fixture(const FormFixture& fx);

// eta products, computed from the product expansions and tabulated from
// their own coefficients: the weight-12 level-1 cusp form (eta(z)^24) and
// the weight-2 level-11 form (eta(z)^2 eta(11z)^2)
struct EtaPair {
  FormFixture delta, level11;
};
EtaPair generate_eta_products(long trunc);

// number of projective points of y^2 + y = x^3 - x^2 - 10x - 20 over F_p,
// counted naively (affine scan plus the point at infinity)
long curve_point_count(long p);

// quadratic base change of a rational eigenform with trivial nebentypus
// (psi0(q) = q^{k-2} throughout the table, else NonTrivialCharacter):
// a(p_i) = a_p at split primes, a(pO) = a_p^2 - 2 p^{k-1} at inert primes,
// a(p_D) = a_p at the ramified prime, extended to all ideals by the Hecke
// recursion and multiplicativity; coefficients c(xi) = a((xi)). primes
// dividing the level are left out of the emitted table.
FormFixture generate_base_change(const FormFixture& f, const QuadField& L, long trunc);

// deterministic synthetic eigen systems ------------------------------------

// small pseudorandom integer eigenvalues at every prime <= trunc, with
// psi0 identically 1; entries depend only on (name, seed)
EigenData synth_elliptic_table(const std::string& name, unsigned seed, long trunc);

// impose the working-prime data a_p = alpha0 + beta0, psi0(p) = alpha0 beta0 / p
void set_p_roots(EigenData& f, long p, const Rational& alpha0, const Rational& beta0);

// p-stabilization: level multiplied by p, a_p replaced by the chosen root,
// psi0(p) dropped so the recursion uses plain U-powers at p
EigenData stabilized_table(const EigenData& f, long p, const Rational& root);
EllipticQExp stabilized_expansion(const EigenData& f, long p, const Rational& root, long trunc);

// Hecke eigenform over a depleted seed: with h_j the complete homogeneous
// symmetric polynomials in the root pair, returns
//   sum_{j,k} h_j(r1) h_k(r2) [pi_1^j pi_2^k] seed     (split)
//   sum_j h_j(r1) [p^j] seed                           (inert; r2 ignored)
// to the seed's truncation. the result is an exact T0-eigenform at the
// primes above p with eigenvalues alpha_i + beta_i, provided the seed is
// depleted at every prime above p (Schema otherwise).
struct RootPair {
  Rational alpha, beta;
};
HilbertQExp eigen_extension_at_p(const HilbertQExp& seed, const OpContext& ctx,
                                 const RootPair& r1, const RootPair& r2);

// traces m <= trunc, divisible by p, at which no coefficient of a seed
// supported on p-unit representatives can land: either no totally positive
// representative of trace m at all, or none coprime to p (inert p further
// needs a non-rational representative whose embedding power has a real
// trace of manageable valuation). targets must vanish on these traces.
std::vector<long> dead_read_traces(const OpContext& ctx, long nu, long trunc);

// rational seed supported on p-unit representatives with tr divisible by p,
// such that the diagonal restriction of d^nu(seed) — nu on the theta side —
// matches the target at every read trace (multiples of p inside the target
// window) to absolute p-adic precision match_prec. the target must vanish
// at every dead read trace (Internal otherwise). weight/level metadata of
// the returned expansion are taken from wt/level.
HilbertQExp fit_restriction_seed(const EllipticQExp& target, const OpContext& ctx,
                                 int theta_side, long nu, long match_prec,
                                 const WeightData& wt, const std::string& level);

}  // namespace mf

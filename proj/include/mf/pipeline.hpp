#pragma once
// end-to-end value assembly: the interpolation-side pipeline (deplete ->
// theta -> diagonal restriction -> nearly-ordinary + isotypic projection ->
// pairing quotient -> Euler prefactor), the cycle-side evaluation with its
// reassembly cross-check, the identity-verification battery, and the
// deterministic synthetic draw machinery those runs are exercised on.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mf/euler.hpp"
#include "mf/fixtures.hpp"
#include "mf/heckelin.hpp"
#include "mf/qexp.hpp"

namespace mf {

// shared run parameters. the Hilbert side carries weight (l1, l2) with
// x_i = (l_i - n)/2 chosen internally; the elliptic weight k then fixes the
// theta exponent: r = (k - l1 - l2)/2 when k dominates (unbalanced regime),
// s = (l1 + l2 - k - 2)/2 when it is dominated (balanced regime).
struct RunConfig {
  long D = 5;
  long p = 11;
  long N = 10;  // target absolute p-adic precision
  long M = 0;   // certified output window; 0 picks the smallest legal one
  long l1 = 2, l2 = 2;
  long k = 12;
  int theta_side = 1;    // which prime above p carries the theta exponent
  int deplete_side = 0;  // 0 = deplete at every prime above p; 1|2 = one side
  bool epsilon_flag = true;  // declared local-sign hypothesis (recorded, with
                             // a syntactic coprimality check, never computed)
  unsigned draw = 1;         // seed for the synthetic systems

  long unbalanced_r() const;  // UnbalancedViolation unless k >= l1+l2+2, even gap
  long balanced_s() const;    // BalancedViolation unless balanced with s >= 0
  long certified_digits() const { return N - 2; }
};

// the ingredients of a value or cycle run: the f*-side eigen space and its
// unit stabilization, the Hilbert tower with its refinement roots, and the
// test-vector coordinates of the pairing. synth_run_input draws a complete
// bundle; fixture-driven callers assemble one from loaded tables.
struct RunInput {
  RunConfig cfg;
  EigenData fstar;  // table at level coprime to p, both p-roots rational
  Rational alpha_star, beta_star;
  EigenBasis basis;     // stabilizations spanning the projection space
  std::string target;   // name of the unit stabilization inside basis
  HilbertQExp tower;    // eigen tower over a p-depleted seed
  RootPair r1, r2;      // refinement roots at the primes above p (r2 = r1 inert)
  std::map<long, Coeff> test_vector;
  // synthetic-draw bookkeeping: coordinates of the fitted target in the
  // stabilized span (index 0 = unit system) and the dead traces it dodged
  std::vector<Rational> span_coords;
  std::vector<long> dead_traces;
};

struct ReportRow {
  std::string label;
  std::string value;
};

struct LValueReport {
  RunConfig cfg;
  long B = 0, in_trunc = 0, out_trunc = 0, digits = 0;
  Coeff rho_depleted, rho_undepleted;
  EulerReport euler;  // at q = p (split) resp. q = p^2 (inert)
  Coeff lvalue;       // rho_depleted / adjoint
  bool lemma_ok = false;  // depleted vs undepleted Euler-factor relation
  std::optional<bool> prediction_ok;  // rho_depleted == c1 K, when c is known
  bool ok = false;
  std::vector<ReportRow> rows;
  std::string to_text() const;
  std::string to_json() const;
};

struct GzReport {
  RunConfig cfg;
  long s = 0, digits = 0;
  Coeff rho, aj, lvalue;
  Rational E_products, E0_products;  // Euler factors from the product formulas
  Rational E_gadget, E0_gadget;      // same factors through the gadget algebra
  Rational adjoint;
  bool euler_paths_ok = false;  // the two factor paths agree exactly
  bool corollary_ok = false;    // reassembly of the value from the cycle side
  std::optional<bool> prediction_ok;
  bool ok = false;
  std::vector<ReportRow> rows;
  std::string to_text() const;
  std::string to_json() const;
};

// outcome of one identity row in the verification battery
struct VerifyRow {
  std::string name;
  bool pass = false;
  bool errored = false;       // the row surfaced an error instead of running
  Err kind = Err::Internal;   // meaningful when errored
  std::string detail;         // first failing coefficient, or the error text
};

struct VerifyReport {
  RunConfig cfg;
  std::vector<VerifyRow> rows;
  bool ok = false;
  std::string to_text() const;
  std::string to_json() const;
};

// deterministic synthetic bundle: eigen systems with exactly one unit
// stabilization among non-unit noise, a target combination vanishing on the
// dead read traces, its fitted seed, and the refinement tower over it
RunInput synth_run_input(const RunConfig& cfg);

// interpolation-side evaluation (unbalanced regime): runs the pipeline both
// with and without depletion and checks the Euler-factor relation between
// the two, plus the absolute prediction when the draw coordinates are known
LValueReport run_lvalue(const RunInput& in);

// cycle-side evaluation (balanced regime, split p): one depleted run, the
// cycle-side value with its sign and factorial, the local factors through
// the product formulas and through the gadget algebra, and the reassembly
GzReport run_gz(const RunInput& in);

// the identity battery: each row runs one operator identity independently;
// failures and surfaced errors become report content, never exceptions
VerifyReport run_verify(const RunConfig& cfg);

// cli exit-code policy: 2 for input/schema errors, 3 for precision or
// truncation exhaustion, 1 for everything else a run can signal
int exit_code_for(Err kind);

// render a coefficient for a report: exact rationals verbatim, p-adic
// scalars truncated to the given absolute precision so reruns at higher
// working precision print identical digits. a quadratic value must have
// imaginary part vanishing to that precision (Internal otherwise).
std::string render_value(const Coeff& c, long digits);

}  // namespace mf

#include "mf/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "mf/mpoly.hpp"
#include "mf/restrict.hpp"

namespace mf {

namespace {

using nlohmann::ordered_json;

bool is_prime_l(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const Rational& as_rational(const Coeff& c, const char* what) {
  const auto* r = std::get_if<Rational>(&c);
  if (!r) fail(Err::Internal, std::string(what) + " expected to stay rational");
  return *r;
}

// a* = a / psi0, psi0* = 1 / psi0 on every stored label
EigenData star_twist(const EigenData& f) {
  EigenData g = f;
  g.name = f.name + "*";
  for (auto& [lab, a] : g.ap) {
    const Rational& x = f.chi(lab);
    if (x == 0) fail(Err::Schema, "vanishing character value at " + lab);
    a = a / x;
    g.psi0[lab] = 1 / x;
  }
  return g;
}

// keep only the table labels readable on a window of size M (the basis
// validation applies T0(q)/U0(q) at every stored label)
EigenData restrict_labels(const EigenData& t, long M) {
  EigenData g = t;
  g.ap.clear();
  g.psi0.clear();
  for (const auto& [lab, a] : t.ap)
    if (std::stol(lab) <= M) g.ap[lab] = a;
  for (const auto& [lab, x] : t.psi0)
    if (std::stol(lab) <= M) g.psi0[lab] = x;
  return g;
}

// x_i with l_i - 2 x_i equal on both slots and minimal non-negative
std::pair<long, long> hilbert_x_pair(long l1, long l2) {
  if (((l1 - l2) % 2 + 2) % 2 != 0)
    fail(Err::Schema, "hilbert weight needs l1 = l2 mod 2");
  long par = ((l1 % 2) + 2) % 2;
  return {(l1 - par) / 2, (l2 - par) / 2};
}

// theta exponent and regime of a config: positive r when the elliptic
// weight dominates, -1-s when the Hilbert pair does
long theta_exponent(const RunConfig& cfg, bool balanced) {
  return balanced ? -1 - cfg.balanced_s() : cfg.unbalanced_r();
}

long iterate_budget(const RunConfig& cfg, long nu) {
  if (nu < 0) return 1;
  long d = cfg.certified_digits();
  return std::max(1L, (d + nu - 1) / nu);
}

// c with c[0] = 1 and sum_i c[i] row[i] = 0 for every kill row, free
// coordinates pinned to 1 so noise systems stay exercised
std::vector<Rational> kill_coords(const std::vector<std::vector<Rational>>& rows, long n) {
  std::vector<Rational> c(n, Rational(1));
  if (rows.empty()) return c;
  // unknowns c[1..n-1]; move the c[0]-column to the right-hand side
  long m = static_cast<long>(rows.size()), w = n - 1;
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(w + 1));
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < w; ++j) a[i][j] = rows[i][j + 1];
    a[i][w] = -rows[i][0];
  }
  std::vector<long> pivot_col(m, -1);
  long r = 0;
  for (long j = 0; j < w && r < m; ++j) {
    long piv = -1;
    for (long i = r; i < m; ++i)
      if (a[i][j] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[r], a[piv]);
    Rational d = a[r][j];
    for (long t = j; t <= w; ++t) a[r][t] = a[r][t] / d;
    for (long i = 0; i < m; ++i) {
      if (i == r || a[i][j] == 0) continue;
      Rational f = a[i][j];
      for (long t = j; t <= w; ++t) a[i][t] = a[i][t] - f * a[r][t];
    }
    pivot_col[r] = j;
    ++r;
  }
  for (long i = r; i < m; ++i)
    if (a[i][w] != 0)
      fail(Err::Internal, "synthetic draw degenerate: no target with a unit component");
  // free unknowns stay 1; pivots collect the remainder
  for (long i = r - 1; i >= 0; --i) {
    long j = pivot_col[i];
    Rational v = a[i][w];
    for (long t = j + 1; t < w; ++t) v = v - a[i][t] * c[t + 1];
    c[j + 1] = v;
  }
  return c;
}

// primes above p restricted to one side (1 or 2), or all of them
std::vector<PrimeAbove> depletion_set(const OpContext& ctx, int side) {
  if (side == 0) return ctx.primes();
  return {ctx.prime(ctx.splitting() == Splitting::Split ? side : 0)};
}

// shared projection pipeline: promote -> theta -> restrict -> iterate the
// U0(p)/alpha* contraction -> isotypic projection -> pairing quotient
Coeff project_and_pair(const RunInput& in, const HilbertQExp& g, long nu, long budget,
                       long floor_mod) {
  const RunConfig& cfg = in.cfg;
  OpContext ctx(g.field(), cfg.p, cfg.N + 6);
  HilbertQExp gp = hil_promote(g, cfg.p, cfg.N + 6);
  long r1 = cfg.theta_side == 1 ? nu : 0;
  long r2 = cfg.theta_side == 1 ? 0 : nu;
  HilbertQExp th = hil_theta(gp, ctx, r1, r2);
  EllipticQExp H = diagonal_restrict(th);
  EllipticQExp ord = nearly_ordinary_project(H, in.basis, cfg.p, OrdinaryMode::Iterate, budget,
                                             floor_mod);
  EllipticQExp iso = isotypic_project(ord, in.basis, in.target, floor_mod);
  GramRatios gram = build_gram_ratios(in.fstar, cfg.p * in.fstar.level);
  return evaluate_J(iso, in.test_vector, in.fstar, gram, floor_mod);
}

void ensure_digits(const Coeff& c, long digits, const char* what) {
  long prec = 0;
  if (std::holds_alternative<Rational>(c)) return;  // exact
  if (const auto* x = std::get_if<PadicNum>(&c))
    prec = x->is_exact_zero() ? digits : x->prec();
  else {
    const PadicQuad& q = std::get<PadicQuad>(c);
    prec = std::min(q.re().is_exact_zero() ? digits : q.re().prec(),
                    q.im().is_exact_zero() ? digits : q.im().prec());
  }
  if (prec < digits)
    fail(Err::PrecisionExhausted,
         std::string(what) + " carries fewer digits than certified; raise the working precision");
}

Rational factorial(long s) {
  Rational f = 1;
  for (long i = 2; i <= s; ++i) f = f * i;
  return f;
}

void push_row(std::vector<ReportRow>& rows, const std::string& label, const std::string& value) {
  rows.push_back({label, value});
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

ordered_json rows_json(const std::vector<ReportRow>& rows) {
  ordered_json a = ordered_json::array();
  for (const ReportRow& r : rows) a.push_back({{"label", r.label}, {"value", r.value}});
  return a;
}

ordered_json config_json(const RunConfig& cfg) {
  return ordered_json{{"D", cfg.D},
                      {"p", cfg.p},
                      {"N", cfg.N},
                      {"M", cfg.M},
                      {"l1", cfg.l1},
                      {"l2", cfg.l2},
                      {"k", cfg.k},
                      {"theta_side", cfg.theta_side},
                      {"deplete_side", cfg.deplete_side},
                      {"epsilon_flag", cfg.epsilon_flag},
                      {"draw", cfg.draw}};
}

std::string rows_text(const std::string& head, const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << head << "\n";
  for (const ReportRow& r : rows) os << "  " << r.label << ": " << r.value << "\n";
  return os.str();
}

// scan for the smallest prime of the wanted splitting type, skipping skip_p
long small_prime_of_type(const QuadField& L, Splitting want, long skip_p = 0) {
  for (long q = 2; q < 200; ++q) {
    if (!is_prime_l(q) || q == skip_p) continue;
    if (L.splitting_type(q) == want) return q;
  }
  fail(Err::Internal, "no small prime of the requested splitting type");
}

// random rational elliptic expansion for the verification battery
EllipticQExp random_elliptic(std::uint64_t& state, long trunc, long k, long w) {
  EllipticQExp f(WeightData::elliptic(k, w), 1, trunc);
  for (long n = 1; n <= trunc; ++n) {
    long num = static_cast<long>(mix(state) % 19) - 9;
    long den = 1 + static_cast<long>(mix(state) % 3);
    f.set(n, Coeff(Rational(num, den)));
  }
  return f;
}

// random rational Hilbert expansion over L, complete to trunc
HilbertQExp random_hilbert(std::uint64_t& state, const QuadField& L, long trunc, long l1, long l2,
                           long x1, long x2) {
  HilbertQExp g(L, WeightData::hilbert(l1, l2, x1, x2), "1", trunc);
  for (long n = 1; n <= trunc; ++n)
    for (const QuadElem& xi : L.enumerate_totally_positive_by_trace(n)) {
      long num = static_cast<long>(mix(state) % 19) - 9;
      g.set(xi, Coeff(Rational(num)));
    }
  return g;
}

// first coefficient where two elliptic expansions disagree, as report text
std::string first_mismatch(const EllipticQExp& f, const EllipticQExp& g, long agree_mod) {
  long T = std::min(f.trunc(), g.trunc());
  for (long n = 1; n <= T; ++n)
    if (!cagree(f.at(n), g.at(n), agree_mod))
      return "first failing coefficient at q^" + std::to_string(n) + ": " + cstr(f.at(n)) +
             " vs " + cstr(g.at(n));
  return "";
}

// determinant of I - M X for an 8x8 rational matrix via Newton's identities
// on the power-sum traces; independent of the euler module's product path
std::vector<Rational> det_via_traces(const std::vector<Coeff>& mc) {
  const long n = 8;
  if (mc.size() != n * n) fail(Err::Internal, "expected an 8x8 matrix");
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) M[i][j] = as_rational(mc[i * n + j], "matrix entry");
  std::vector<std::vector<Rational>> P = M;
  std::vector<Rational> power_sum(n + 1, Rational(0));
  for (long k = 1; k <= n; ++k) {
    if (k > 1) {
      std::vector<std::vector<Rational>> Q(n, std::vector<Rational>(n, Rational(0)));
      for (long i = 0; i < n; ++i)
        for (long t = 0; t < n; ++t) {
          if (P[i][t] == 0) continue;
          for (long j = 0; j < n; ++j) Q[i][j] = Q[i][j] + P[i][t] * M[t][j];
        }
      P = Q;
    }
    for (long i = 0; i < n; ++i) power_sum[k] = power_sum[k] + P[i][i];
  }
  std::vector<Rational> e(n + 1, Rational(0));
  e[0] = 1;
  for (long k = 1; k <= n; ++k) {
    Rational acc = 0;
    for (long i = 1; i <= k; ++i)
      acc = acc + (i % 2 == 1 ? Rational(1) : Rational(-1)) * e[k - i] * power_sum[i];
    e[k] = acc / k;
  }
  std::vector<Rational> out(n + 1);
  for (long k = 0; k <= n; ++k) out[k] = (k % 2 == 0 ? e[k] : -e[k]);
  return out;
}

SatakeParams random_satake(std::uint64_t& state, Splitting type, long q) {
  auto pair = [&](int rescale) {
    SatakePair s;
    s.q = q;
    s.rescale_power = rescale;
    s.c1 = Coeff(Rational(1 + static_cast<long>(mix(state) % 6)));
    s.c2 = Coeff(Rational(1 + static_cast<long>(mix(state) % 6)));
    return s;
  };
  SatakeParams S;
  S.type = type;
  S.q = q;
  S.chi_a = pair(type == Splitting::Inert ? 2 : 1);
  if (type == Splitting::Split) S.chi_b = pair(1);
  S.psi = pair(1);
  return S;
}

}  // namespace

// ---------------------------------------------------------------------------
// config

long RunConfig::unbalanced_r() const {
  long gap = k - l1 - l2;
  if (gap < 2 || gap % 2 != 0)
    fail(Err::UnbalancedViolation,
         "unbalanced regime needs k >= l1 + l2 + 2 with an even gap, got k=" + std::to_string(k) +
             " against l=(" + std::to_string(l1) + "," + std::to_string(l2) + ")");
  return gap / 2;
}

long RunConfig::balanced_s() const {
  long gap = l1 + l2 - k - 2;
  if (gap < 0 || gap % 2 != 0 || !balanced_triple(l1, l2, k))
    fail(Err::BalancedViolation,
         "balanced regime needs a balanced triple with s >= 0, got (l1,l2,k)=(" +
             std::to_string(l1) + "," + std::to_string(l2) + "," + std::to_string(k) + ")");
  return gap / 2;
}

int exit_code_for(Err kind) {
  switch (kind) {
    case Err::Schema:
    case Err::NonTrivialCharacter:
      return 2;
    case Err::PrecisionExhausted:
    case Err::InsufficientTruncation:
      return 3;
    default:
      return 1;
  }
}

std::string render_value(const Coeff& c, long digits) {
  if (const auto* r = std::get_if<Rational>(&c)) return r->get_str();
  if (const auto* x = std::get_if<PadicNum>(&c)) return x->truncated(digits).str();
  const PadicQuad& q = std::get<PadicQuad>(c);
  if (!q.im().truncated(digits).vanishes())
    fail(Err::Internal, "reported value has a nonvanishing imaginary part");
  return q.re().truncated(digits).str();
}

// ---------------------------------------------------------------------------
// synthetic draw

RunInput synth_run_input(const RunConfig& cfg) {
  QuadField L = QuadField::make(cfg.D);
  if (L.splitting_type(cfg.p) == Splitting::Ramified)
    fail(Err::Schema, "working prime ramifies in the field");
  bool balanced = cfg.k < cfg.l1 + cfg.l2;
  long nu = theta_exponent(cfg, balanced);
  long budget = iterate_budget(cfg, nu);
  auto [x1, x2] = hilbert_x_pair(cfg.l1, cfg.l2);
  OpContext ctx(L, cfg.p, cfg.N + 6);
  std::string dlab = cfg.p == 2 ? "3" : "2";
  long dq = std::stol(dlab);

  // window sizing: the isotypic chains need the product of the per-pair
  // distinguishing primes readable, the pairing needs p readable, and the
  // kill system needs enough systems to dodge every dead read trace
  long n_sys = 3, M_out = 0, M_in = 0;
  std::vector<long> dead;
  for (int round = 0; round < 6; ++round) {
    long chain = 1;
    for (long i = 1; i < n_sys; ++i) chain *= dq;
    M_out = std::max({cfg.M, cfg.p, chain});
    M_in = M_out;
    for (long b = 0; b < budget; ++b) M_in *= cfg.p;
    dead = dead_read_traces(ctx, nu, M_in);
    long need = dead.empty() ? 3 : static_cast<long>(dead.size()) + 2;
    if (need > 8)
      fail(Err::Internal, "too many dead read traces for a synthetic draw here");
    if (need <= n_sys) break;
    n_sys = need;
  }

  // the f-side system: ordinary refinement (u1, p u2), star twist, unit
  // stabilization at alpha* = 1/u2; noise systems stabilized at non-units
  std::uint64_t state = fnv1a("draw") ^ (0x5851f42d4c957f2dULL * (cfg.draw + 1));
  long u1 = 1 + static_cast<long>(mix(state) % (cfg.p - 1));
  long u2 = 1 + static_cast<long>(mix(state) % (cfg.p - 1));
  WeightData ewt = WeightData::elliptic(cfg.k, x1 + x2 + nu);
  EigenData f0 = synth_elliptic_table("target", cfg.draw, M_in);
  f0.wt = ewt;
  set_p_roots(f0, cfg.p, Rational(u1), Rational(cfg.p) * u2);
  EigenData fstar = star_twist(f0);
  Rational alpha_star = Rational(1) / u2;
  Rational beta_star = Rational(cfg.p) / u1;

  std::vector<EigenData> stabilized;  // full labels, for the big-window expansions
  stabilized.push_back(stabilized_table(fstar, cfg.p, alpha_star));
  Rational a_dist = fstar.eig(dlab);
  for (long i = 1; i < n_sys; ++i) {
    EigenData t = synth_elliptic_table("noise" + std::to_string(i), cfg.draw + i, M_in);
    t.wt = ewt;
    set_p_roots(t, cfg.p, Rational(cfg.p) * (i + 1), Rational(1));
    t.ap[dlab] = a_dist + i;  // pairwise separated at the shared label
    stabilized.push_back(stabilized_table(t, cfg.p, Rational(cfg.p) * (i + 1)));
  }

  EigenBasis basis;
  basis.level = cfg.p;
  for (long i = 0; i < n_sys; ++i) {
    basis.systems.push_back(restrict_labels(stabilized[i], M_out));
    basis.forms.push_back(eigen_expansion(stabilized[i], M_out));
  }
  for (int i = 0; i < basis.size(); ++i)
    for (int j = i + 1; j < basis.size(); ++j) basis.dist[{i, j}] = dlab;

  // target combination: unit component pinned to 1, vanishing on every dead
  // read trace so the seed fit has nothing impossible to match
  std::vector<EllipticQExp> W;
  for (long i = 0; i < n_sys; ++i) W.push_back(eigen_expansion(stabilized[i], M_in));
  std::vector<std::vector<Rational>> kill_rows;
  for (long m : dead) {
    std::vector<Rational> row(n_sys);
    for (long i = 0; i < n_sys; ++i) row[i] = as_rational(W[i].at(m), "eigen expansion");
    kill_rows.push_back(row);
  }
  std::vector<Rational> c = kill_coords(kill_rows, n_sys);
  EllipticQExp target = ell_scale(W[0], Coeff(c[0]));
  for (long i = 1; i < n_sys; ++i)
    target = ell_add(target, ell_scale(W[i], Coeff(c[i])));

  WeightData hwt = WeightData::hilbert(cfg.l1, cfg.l2, x1, x2);
  HilbertQExp seed = fit_restriction_seed(target, ctx, cfg.theta_side, nu, cfg.N + 3, hwt, "1");
  RootPair r1{Rational(1 + static_cast<long>(mix(state) % 4)),
              Rational(1 + static_cast<long>(mix(state) % 4))};
  RootPair r2{Rational(1 + static_cast<long>(mix(state) % 4)),
              Rational(1 + static_cast<long>(mix(state) % 4))};
  if (ctx.splitting() == Splitting::Inert) r2 = r1;
  HilbertQExp tower = eigen_extension_at_p(seed, ctx, r1, r2);

  RunInput in;
  in.cfg = cfg;
  in.cfg.M = M_out;
  in.fstar = fstar;
  in.alpha_star = alpha_star;
  in.beta_star = beta_star;
  in.basis = basis;
  in.target = stabilized[0].name;
  in.tower = tower;
  in.r1 = r1;
  in.r2 = r2;
  in.test_vector = {{1, Coeff(Rational(1))}};
  in.span_coords = c;
  in.dead_traces = dead;
  return in;
}

// ---------------------------------------------------------------------------
// interpolation-side run

LValueReport run_lvalue(const RunInput& in) {
  const RunConfig& cfg = in.cfg;
  long r = cfg.unbalanced_r();
  QuadField L = in.tower.field();
  OpContext ctx(L, cfg.p, cfg.N + 6);
  if (cfg.epsilon_flag && in.fstar.level % cfg.p == 0)
    fail(Err::Schema, "local-sign hypothesis needs p coprime to the base level");
  long digits = cfg.certified_digits();
  if (digits < 1) fail(Err::Schema, "precision target leaves no certified digits");
  long budget = iterate_budget(cfg, r);

  LValueReport rep;
  rep.cfg = cfg;
  rep.B = budget;
  rep.in_trunc = in.tower.trunc();
  rep.out_trunc = cfg.M;
  rep.digits = digits;

  HilbertQExp depleted = hil_deplete(in.tower, depletion_set(ctx, cfg.deplete_side));
  rep.rho_depleted = project_and_pair(in, depleted, r, budget, digits);
  rep.rho_undepleted = project_and_pair(in, in.tower, r, budget, digits);
  ensure_digits(rep.rho_depleted, digits, "projection value");
  ensure_digits(rep.rho_undepleted, digits, "undepleted projection value");

  std::vector<Coeff> roots;
  long q = 0;
  if (ctx.splitting() == Splitting::Split) {
    Rational pw = rat_pow(Rational(cfg.p), r + 1);
    roots = {Coeff(pw * in.r1.alpha), Coeff(pw * in.r1.beta), Coeff(in.r2.alpha),
             Coeff(in.r2.beta)};
    q = cfg.p;
  } else {
    Rational pw = rat_pow(Rational(cfg.p), r + 2);
    roots = {Coeff(pw * in.r1.alpha), Coeff(pw * in.r1.beta)};
    q = cfg.p * cfg.p;
  }
  rep.euler = assemble_euler(ctx.splitting(), roots, Coeff(in.alpha_star), Coeff(in.beta_star), q);

  // the depletion lemma as an executable oracle: removing the p-part of the
  // tower multiplies the projected value by E (inert) resp. E/E0 (split)
  if (ctx.splitting() == Splitting::Split)
    rep.lemma_ok = cagree(cmul(rep.rho_depleted, rep.euler.E0),
                          cmul(rep.rho_undepleted, rep.euler.E), digits);
  else
    rep.lemma_ok = cagree(rep.rho_depleted, cmul(rep.rho_undepleted, rep.euler.E), digits);

  Rational K;
  if (!in.span_coords.empty()) {
    K = 1 - in.beta_star * in.fstar.eig(std::to_string(cfg.p)) / (cfg.p + 1);
    Rational pred = in.span_coords[0] * K;
    rep.prediction_ok = cagree(rep.rho_depleted, Coeff(pred), digits);
  }

  rep.lvalue = cdiv(rep.rho_depleted, rep.euler.adjoint);
  ensure_digits(rep.lvalue, digits, "assembled value");
  rep.ok = rep.lemma_ok && rep.prediction_ok.value_or(true);

  push_row(rep.rows, "regime", "unbalanced, r = " + std::to_string(r));
  push_row(rep.rows, "splitting", ctx.splitting() == Splitting::Split ? "split" : "inert");
  push_row(rep.rows, "iterate budget", std::to_string(budget));
  push_row(rep.rows, "input window", std::to_string(rep.in_trunc));
  push_row(rep.rows, "certified window", std::to_string(rep.out_trunc));
  push_row(rep.rows, "certified digits", std::to_string(digits));
  push_row(rep.rows, "epsilon hypothesis", cfg.epsilon_flag ? "declared, level coprime" : "not declared");
  push_row(rep.rows, "alpha*", in.alpha_star.get_str());
  push_row(rep.rows, "beta*", in.beta_star.get_str());
  if (!in.span_coords.empty()) {
    push_row(rep.rows, "target unit coordinate", in.span_coords[0].get_str());
    push_row(rep.rows, "pairing constant K", K.get_str());
    std::string ds;
    for (long m : in.dead_traces) ds += (ds.empty() ? "" : ",") + std::to_string(m);
    push_row(rep.rows, "dead read traces", ds.empty() ? "none" : ds);
  }
  push_row(rep.rows, "rho (depleted)", render_value(rep.rho_depleted, digits));
  push_row(rep.rows, "rho (undepleted)", render_value(rep.rho_undepleted, digits));
  push_row(rep.rows, "euler E", render_value(rep.euler.E, digits));
  push_row(rep.rows, "euler E0", render_value(rep.euler.E0, digits));
  push_row(rep.rows, "adjoint E(f*)", render_value(rep.euler.adjoint, digits));
  push_row(rep.rows, "euler prefactor", render_value(rep.euler.prefactor, digits));
  push_row(rep.rows, "depletion lemma", bool_str(rep.lemma_ok));
  if (rep.prediction_ok) push_row(rep.rows, "absolute prediction", bool_str(*rep.prediction_ok));
  push_row(rep.rows, "lvalue", render_value(rep.lvalue, digits));
  return rep;
}

// ---------------------------------------------------------------------------
// cycle-side run

GzReport run_gz(const RunInput& in) {
  const RunConfig& cfg = in.cfg;
  long s = cfg.balanced_s();
  QuadField L = in.tower.field();
  if (L.splitting_type(cfg.p) != Splitting::Split)
    fail(Err::NonSplitPrime, "cycle-side evaluation needs a split working prime");
  OpContext ctx(L, cfg.p, cfg.N + 6);
  long digits = cfg.certified_digits();
  if (digits < 1) fail(Err::Schema, "precision target leaves no certified digits");
  long nu = -1 - s;

  GzReport rep;
  rep.cfg = cfg;
  rep.s = s;
  rep.digits = digits;

  int side = cfg.deplete_side == 0 ? cfg.theta_side : cfg.deplete_side;
  HilbertQExp depleted = hil_deplete(in.tower, depletion_set(ctx, side));
  rep.rho = project_and_pair(in, depleted, nu, 1, digits);
  ensure_digits(rep.rho, digits, "projection value");

  // local factors, path one: the product formulas with the rescaled roots
  Rational pw = rat_pow(Rational(cfg.p), nu + 1);
  SplitEuler se = euler_split(Coeff(pw * in.r1.alpha), Coeff(pw * in.r1.beta), Coeff(in.r2.alpha),
                              Coeff(in.r2.beta), Coeff(in.alpha_star), cfg.p);
  rep.E_products = as_rational(se.E, "euler factor");
  rep.E0_products = as_rational(se.E0, "euler factor");

  // path two: the gadget algebra. P evaluated on the diagonal gives E, and
  // the symmetric factor identity (a1 a2 - b1 b2)(T) = (1 - kappa T^2) P(T)
  // recovers E0 as the quotient at the same point
  Gadget gd = build_gadget(Coeff(in.r1.alpha), Coeff(in.r1.beta), Coeff(in.r2.alpha),
                           Coeff(in.r2.beta));
  Rational x = rat_pow(Rational(cfg.p), nu) / in.alpha_star;
  rep.E_gadget = as_rational(gd.P.eval(Coeff(x), Coeff(Rational(1))), "gadget eval");
  std::vector<Coeff> sym = symmetric_factor(gd);
  Rational sx = 0, xp = 1;
  for (const Coeff& ck : sym) {
    sx = sx + as_rational(ck, "symmetric factor") * xp;
    xp = xp * x;
  }
  if (rep.E_gadget == 0) fail(Err::ZeroDenominator, "local factor vanishes at the gadget point");
  rep.E0_gadget = sx / rep.E_gadget;
  rep.euler_paths_ok = rep.E_products == rep.E_gadget && rep.E0_products == rep.E0_gadget;

  rep.adjoint = 1 - in.beta_star / in.alpha_star;
  if (rep.adjoint == 0 || rep.E0_products == 0)
    fail(Err::ZeroDenominator, "degenerate local data");

  // cycle side and its reassembly: aj carries the sign, the factorial and
  // the product-path factors; the reassembled value runs through the gadget
  // path, so agreement exercises both pipelines end to end
  Rational sign = s % 2 == 0 ? Rational(1) : Rational(-1);
  Rational fact = factorial(s);
  rep.aj = cmul(rep.rho, Coeff(sign * fact * rep.E0_products / rep.E_products));
  rep.lvalue = cdiv(rep.rho, Coeff(rep.adjoint));
  Coeff reassembled =
      cmul(rep.aj, Coeff(sign / (fact * rep.adjoint) * rep.E_gadget / rep.E0_gadget));
  rep.corollary_ok = cagree(rep.lvalue, reassembled, digits);

  if (!in.span_coords.empty()) {
    Rational K = 1 - in.beta_star * in.fstar.eig(std::to_string(cfg.p)) / (cfg.p + 1);
    rep.prediction_ok = cagree(rep.rho, Coeff(in.span_coords[0] * K), digits);
  }
  ensure_digits(rep.lvalue, digits, "assembled value");
  rep.ok = rep.euler_paths_ok && rep.corollary_ok && rep.prediction_ok.value_or(true);

  push_row(rep.rows, "regime", "balanced, s = " + std::to_string(s));
  push_row(rep.rows, "theta exponent", std::to_string(nu));
  push_row(rep.rows, "depleted side", std::to_string(side));
  push_row(rep.rows, "certified digits", std::to_string(digits));
  push_row(rep.rows, "rho", render_value(rep.rho, digits));
  push_row(rep.rows, "euler E (products)", rep.E_products.get_str());
  push_row(rep.rows, "euler E0 (products)", rep.E0_products.get_str());
  push_row(rep.rows, "euler E (gadget)", rep.E_gadget.get_str());
  push_row(rep.rows, "euler E0 (gadget)", rep.E0_gadget.get_str());
  push_row(rep.rows, "euler paths agree", bool_str(rep.euler_paths_ok));
  push_row(rep.rows, "adjoint E(f*)", rep.adjoint.get_str());
  push_row(rep.rows, "cycle value", render_value(rep.aj, digits));
  push_row(rep.rows, "lvalue", render_value(rep.lvalue, digits));
  push_row(rep.rows, "reassembly", bool_str(rep.corollary_ok));
  if (rep.prediction_ok) push_row(rep.rows, "absolute prediction", bool_str(*rep.prediction_ok));
  return rep;
}

// ---------------------------------------------------------------------------
// verification battery

namespace {

struct RowRunner {
  std::vector<VerifyRow>& rows;
  void operator()(const std::string& name, const std::function<std::pair<bool, std::string>()>& f) {
    VerifyRow row;
    row.name = name;
    try {
      auto [pass, detail] = f();
      row.pass = pass;
      row.detail = detail;
    } catch (const MfError& e) {
      row.errored = true;
      row.kind = e.kind;
      row.pass = false;
      row.detail = std::string(err_name(e.kind)) + ": " + e.what();
    }
    rows.push_back(row);
  }
};

}  // namespace

VerifyReport run_verify(const RunConfig& cfg) {
  VerifyReport rep;
  rep.cfg = cfg;
  RowRunner run{rep.rows};
  QuadField L = QuadField::make(cfg.D);
  long M = cfg.M > 0 ? cfg.M : 60;
  std::uint64_t state = fnv1a("verify") ^ (0x5851f42d4c957f2dULL * (cfg.draw + 1));

  run("hecke-identity-elliptic", [&]() -> std::pair<bool, std::string> {
    for (long p : {3L, 5L, 7L})
      for (int d = 0; d < 4; ++d) {
        EllipticQExp f = random_elliptic(state, M, 2, 1);
        Rational psi(1 + static_cast<long>(mix(state) % 5));
        if (!ell_hecke_identity_check(f, p, psi, 0)) {
          EllipticQExp lhs = ell_T0(f, p, psi);
          EllipticQExp rhs = ell_add(
              ell_U0(f, p),
              ell_scale(ell_plain_shift(f, p, 1), Coeff(Rational(p) * psi)).with_level(f.level()));
          return {false, "p=" + std::to_string(p) + " " + first_mismatch(lhs, rhs, 0)};
        }
      }
    return {true, "T0 = U0 + p psi0 [p], 12 rational draws at p in {3,5,7}"};
  });

  run("hecke-identity-hilbert", [&]() -> std::pair<bool, std::string> {
    long sp = small_prime_of_type(L, Splitting::Split);
    OpContext ctx(L, sp, 8);
    for (int d = 0; d < 3; ++d) {
      HilbertQExp g = random_hilbert(state, L, std::min(M, 24L), 2, 2, 1, 1);
      Rational psi(1 + static_cast<long>(mix(state) % 5));
      if (!hil_hecke_identity_check(g, ctx.prime(1), psi, 0))
        return {false, "failed at the split prime " + ctx.prime(1).label()};
    }
    return {true, "3 rational draws at the split prime above " + std::to_string(sp)};
  });

  run("u-after-v", [&]() -> std::pair<bool, std::string> {
    EllipticQExp f = random_elliptic(state, M, 4, 2);
    EllipticQExp back = ell_U0(ell_V(f, cfg.p), cfg.p);
    std::string bad = first_mismatch(back, f, 0);
    if (!bad.empty()) return {false, bad};
    return {true, "U0(p) V(p) = id on a window of " + std::to_string(back.trunc())};
  });

  run("v-commutation-split", [&]() -> std::pair<bool, std::string> {
    long sp = small_prime_of_type(L, Splitting::Split);
    HilbertQExp g = random_hilbert(state, L, std::min(M, 30L), 2, 2, 1, 1);
    return {check_V_commutation(g, sp, 0), "rational scalar ell^{-1} at ell=" + std::to_string(sp)};
  });

  run("v-commutation-inert", [&]() -> std::pair<bool, std::string> {
    long ip = small_prime_of_type(L, Splitting::Inert);
    HilbertQExp g = random_hilbert(state, L, std::min(M, 30L), 2, 2, 1, 1);
    return {check_V_commutation(g, ip, 0), "rational scalar ell^{-1} at ell=" + std::to_string(ip)};
  });

  run("thor-vanishing", [&]() -> std::pair<bool, std::string> {
    long sp = L.splitting_type(cfg.p) == Splitting::Split ? cfg.p
                                                          : small_prime_of_type(L, Splitting::Split);
    OpContext ctx(L, sp, cfg.N + 4);
    HilbertQExp g = random_hilbert(state, L, M, 2, 2, 1, 1);
    bool ok = check_thor_vanishing(g, ctx, 1, 2) && check_thor_vanishing(g, ctx, 2, 1);
    return {ok, "U0 restrict((deplete_j g)|V(w_i)) = 0 for i != j at p=" + std::to_string(sp)};
  });

  run("thor-mutation", [&]() -> std::pair<bool, std::string> {
    long sp = L.splitting_type(cfg.p) == Splitting::Split ? cfg.p
                                                          : small_prime_of_type(L, Splitting::Split);
    OpContext ctx(L, sp, cfg.N + 4);
    HilbertQExp g = random_hilbert(state, L, M, 2, 2, 1, 1);
    bool vanished = check_thor_vanishing(g, ctx, 1, 1);
    return {!vanished, "the i = j mutation must not vanish"};
  });

  run("diamond-commutation", [&]() -> std::pair<bool, std::string> {
    HilbertQExp g = random_hilbert(state, L, std::min(M, 30L), 2, 2, 1, 1);
    Rational z(3);
    bool ok = check_diamond_commutation(g, Coeff(z), Coeff(z * z), 1, 0);
    return {ok, "retag delta = 1 doubles into the elliptic weight"};
  });

  run("depletion-idempotent-elliptic", [&]() -> std::pair<bool, std::string> {
    EllipticQExp f = random_elliptic(state, M, 2, 1);
    EllipticQExp once = ell_deplete(f, cfg.p);
    std::string bad = first_mismatch(ell_deplete(once, cfg.p), once, 0);
    return {bad.empty(), bad.empty() ? "deplete^2 = deplete at p" : bad};
  });

  run("depletion-idempotent-hilbert", [&]() -> std::pair<bool, std::string> {
    OpContext ctx(L, cfg.p, 8);
    HilbertQExp g = random_hilbert(state, L, std::min(M, 30L), 2, 2, 1, 1);
    HilbertQExp once = hil_deplete(g, ctx.primes());
    return {hil_agree(hil_deplete(once, ctx.primes()), once, 0), "deplete^2 = deplete above p"};
  });

  run("stabilization-eigenvalue", [&]() -> std::pair<bool, std::string> {
    EigenData t = synth_elliptic_table("verify-stab", cfg.draw, M);
    long sp = 7;
    set_p_roots(t, sp, Rational(2), Rational(3 * sp));
    for (const Rational& root : {Rational(2), Rational(3 * sp)}) {
      EllipticQExp w = stabilized_expansion(t, sp, root, M);
      EllipticQExp lhs = ell_U0(w, sp);
      std::string bad = first_mismatch(lhs, ell_scale(w, Coeff(root)), 0);
      if (!bad.empty()) return {false, "root " + root.get_str() + ": " + bad};
    }
    return {true, "U0(7) w = root * w for both refinements, exact"};
  });

  run("petersson-recursion", [&]() -> std::pair<bool, std::string> {
    EtaPair eta = generate_eta_products(40);
    EigenData t = eta.level11.table();
    Rational r31 = petersson_ratio(t, 3, 1, 33);
    if (r31 != Rational(-1, 4))
      return {false, "r(3,1) = " + r31.get_str() + ", expected -1/4"};
    GramRatios gram = build_gram_ratios(t, 33);
    if (gram.at(1, 3) != r31 || gram.at(3, 1) != r31 || gram.at(1, 1) != 1 || gram.at(3, 3) != 1)
      return {false, "gram table inconsistent with the peeling recursion"};
    return {true, "level-11 fixture: r(3,1) = -1/4 and the gram table closes"};
  });

  run("gadget-linear", [&]() -> std::pair<bool, std::string> {
    for (int d = 0; d < 20; ++d) {
      std::uint64_t s0 = state;
      Gadget g = build_gadget(Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)),
                              Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)),
                              Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)),
                              Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)));
      if (!check_linear_identity(g)) return {false, "draw state " + std::to_string(s0)};
    }
    return {true, "P = a2 P1 + b1 P2 = a1 P2 + b2 P1 on 20 rational draws"};
  });

  run("gadget-square", [&]() -> std::pair<bool, std::string> {
    for (int d = 0; d < 20; ++d) {
      Gadget g = build_gadget(Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)),
                              Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)),
                              Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)),
                              Coeff(Rational(static_cast<long>(mix(state) % 7) - 3)));
      if (!check_square_identity(g)) return {false, "square identity failed on a rational draw"};
    }
    return {true, "P^2 = (a1 a2 - b1 b2) P1 P2 + P (b2 P1 + b1 P2) on 20 draws"};
  });

  run("gadget-symmetric-factor", [&]() -> std::pair<bool, std::string> {
    Gadget g = build_gadget(Coeff(Rational(2)), Coeff(Rational(3)), Coeff(Rational(5)),
                            Coeff(Rational(7)));
    bool standard = check_symmetric_factor(g, false);
    bool alt = check_symmetric_factor(g, true);
    if (!standard) return {false, "the symmetric indexing failed to expand"};
    if (alt) return {false, "the asymmetric indexing unexpectedly also expands"};
    return {true, "exact expansion picks kappa = al1 be1 al2 be2, not the asymmetric variant"};
  });

  run("determinant-split", [&]() -> std::pair<bool, std::string> {
    for (int d = 0; d < 10; ++d) {
      SatakeParams S = random_satake(state, Splitting::Split, 5);
      std::vector<Coeff> lf = local_Lfactor_split(S);
      std::vector<Rational> det = det_via_traces(r_matrix_split(S));
      if (lf.size() != det.size()) return {false, "degree mismatch"};
      for (size_t i = 0; i < lf.size(); ++i)
        if (as_rational(lf[i], "L-factor") != det[i])
          return {false, "coefficient of X^" + std::to_string(i) + " disagrees"};
    }
    return {true, "product formula = det(I8 - rX) by Newton traces, 10 draws"};
  });

  run("determinant-inert", [&]() -> std::pair<bool, std::string> {
    for (int d = 0; d < 10; ++d) {
      SatakeParams S = random_satake(state, Splitting::Inert, 5);
      std::vector<Coeff> lf = local_Lfactor_inert(S);
      std::vector<Rational> det = det_via_traces(r_matrix_inert(S));
      if (lf.size() != det.size()) return {false, "degree mismatch"};
      for (size_t i = 0; i < lf.size(); ++i)
        if (as_rational(lf[i], "L-factor") != det[i])
          return {false, "coefficient of X^" + std::to_string(i) + " disagrees"};
    }
    return {true, "product formula = det(I8 - rX) by Newton traces, 10 draws"};
  });

  run("basis-validation", [&]() -> std::pair<bool, std::string> {
    EigenData t = synth_elliptic_table("verify-basis", cfg.draw, std::min(M, 30L));
    long sp = 7;
    set_p_roots(t, sp, Rational(2), Rational(3 * sp));
    EigenBasis basis;
    basis.level = sp;
    long w = std::min(M, 30L);
    for (const Rational& root : {Rational(2), Rational(3 * sp)}) {
      EigenData st = stabilized_table(t, sp, root);
      basis.systems.push_back(restrict_labels(st, w));
      basis.forms.push_back(eigen_expansion(st, w));
    }
    basis.dist[{0, 1}] = std::to_string(sp);
    return {validate_eigen_basis(basis, 0),
            "the two refinements of one system, separated at their own p"};
  });

  rep.ok = std::all_of(rep.rows.begin(), rep.rows.end(),
                       [](const VerifyRow& r) { return r.pass; });
  return rep;
}

// ---------------------------------------------------------------------------
// report rendering

std::string LValueReport::to_text() const {
  return rows_text("lvalue run (D=" + std::to_string(cfg.D) + ", p=" + std::to_string(cfg.p) +
                       ", N=" + std::to_string(cfg.N) + ", ok=" + bool_str(ok) + ")",
                   rows);
}

std::string LValueReport::to_json() const {
  ordered_json j;
  j["kind"] = "lvalue-report";
  j["config"] = config_json(cfg);
  j["ok"] = ok;
  j["digits"] = digits;
  j["lvalue"] = render_value(lvalue, digits);
  j["rows"] = rows_json(rows);
  return j.dump(2) + "\n";
}

std::string GzReport::to_text() const {
  return rows_text("cycle run (D=" + std::to_string(cfg.D) + ", p=" + std::to_string(cfg.p) +
                       ", s=" + std::to_string(s) + ", ok=" + bool_str(ok) + ")",
                   rows);
}

std::string GzReport::to_json() const {
  ordered_json j;
  j["kind"] = "gz-report";
  j["config"] = config_json(cfg);
  j["ok"] = ok;
  j["digits"] = digits;
  j["lvalue"] = render_value(lvalue, digits);
  j["cycle_value"] = render_value(aj, digits);
  j["rows"] = rows_json(rows);
  return j.dump(2) + "\n";
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "identity battery (D=" << cfg.D << ", p=" << cfg.p << ", M=" << (cfg.M > 0 ? cfg.M : 60)
     << ")\n";
  for (const VerifyRow& r : rows) {
    os << "  " << (r.pass ? "PASS " : r.errored ? "ERROR" : "FAIL ") << " " << r.name;
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << "\n";
  }
  os << (ok ? "all identities hold\n" : "battery not clean\n");
  return os.str();
}

std::string VerifyReport::to_json() const {
  ordered_json j;
  j["kind"] = "verify-report";
  j["config"] = config_json(cfg);
  j["ok"] = ok;
  ordered_json a = ordered_json::array();
  for (const VerifyRow& r : rows) {
    ordered_json e{{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}};
    if (r.errored) e["error"] = err_name(r.kind);
    a.push_back(e);
  }
  j["rows"] = a;
  return j.dump(2) + "\n";
}

}  // namespace mf

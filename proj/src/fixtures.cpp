#include "mf/fixtures.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mf/heckelin.hpp"

namespace mf {

namespace {

using nlohmann::json;

bool is_prime_l(long n) {
  if (n < 2) return false;
  for (long q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

std::vector<std::pair<long, long>> factorize_l(long n) {
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

// ---------------------------------------------------------------------------
// dense integer power series, index = exponent

using ZSeries = std::vector<Integer>;

ZSeries mul_trunc(const ZSeries& a, const ZSeries& b, long T) {
  ZSeries out(T + 1, Integer(0));
  for (long i = 0; i <= T && i < static_cast<long>(a.size()); ++i) {
    if (a[i] == 0) continue;
    long jmax = std::min<long>(T - i, static_cast<long>(b.size()) - 1);
    for (long j = 0; j <= jmax; ++j) {
      if (b[j] == 0) continue;
      mpz_addmul(out[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
  }
  return out;
}

// prod_{n>=1} (1 - q^n) mod q^{T+1}, by the pentagonal number expansion
ZSeries euler_product_series(long T) {
  ZSeries P(T + 1, Integer(0));
  P[0] = 1;
  for (long k = 1;; ++k) {
    long g1 = k * (3 * k - 1) / 2, g2 = k * (3 * k + 1) / 2;
    if (g1 > T) break;
    long s = (k % 2) ? -1 : 1;
    P[g1] += s;
    if (g2 <= T) P[g2] += s;
  }
  return P;
}

ZSeries rescale_exponents(const ZSeries& a, long m, long T) {
  ZSeries out(T + 1, Integer(0));
  for (long i = 0; i <= T / m && i < static_cast<long>(a.size()); ++i) out[i * m] = a[i];
  return out;
}

// ---------------------------------------------------------------------------
// fixture wire format helpers

Rational parse_rat_field(const json& j, const std::string& where) {
  if (!j.is_string()) fail(Err::Schema, where + " must be an exact rational string");
  return rat_parse(j.get<std::string>());
}

long parse_long_field(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(Err::Schema, where + " must be an integer");
  return j.get<long>();
}

bool parse_bool_field(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(Err::Schema, where + " must be a boolean");
  return j.get<bool>();
}

std::string parse_string_field(const json& j, const std::string& where) {
  if (!j.is_string()) fail(Err::Schema, where + " must be a string");
  return j.get<std::string>();
}

long parse_decimal_key(const std::string& s, const std::string& where) {
  if (s.empty() || s.find_first_not_of("-0123456789") != std::string::npos)
    fail(Err::Schema, where + ": bad integer key \"" + s + "\"");
  try {
    return std::stol(s);
  } catch (const std::exception&) {
    fail(Err::Schema, where + ": integer key out of range \"" + s + "\"");
  }
}

// split prime labels look like "p1@11"; inert ones like "(3)"
struct ParsedLabel {
  long q = 0;
  int index = 0;  // 0 inert, 1/2 split
};

ParsedLabel parse_prime_ideal_label(const std::string& lab, const std::string& where) {
  ParsedLabel out;
  if (lab.size() >= 3 && lab.front() == '(' && lab.back() == ')') {
    out.q = parse_decimal_key(lab.substr(1, lab.size() - 2), where);
    out.index = 0;
  } else if (lab.size() >= 4 && lab[0] == 'p' && (lab[1] == '1' || lab[1] == '2') &&
             lab[2] == '@') {
    out.q = parse_decimal_key(lab.substr(3), where);
    out.index = lab[1] - '0';
  } else {
    fail(Err::Schema, where + ": bad prime ideal label \"" + lab + "\"");
  }
  if (!is_prime_l(out.q)) fail(Err::Schema, where + ": label \"" + lab + "\" is not prime");
  return out;
}

// ---------------------------------------------------------------------------
// read-trace point selection shared by the seed fit and the deadness scan.
// the returned point is a p-unit representative at which a rational seed
// value can be solved from the restriction equation; selection depends only
// on (ctx, nu), never on the theta side, so both sides stay consistent.
//
// split p: any p-unit point works, its embedding power is a p-adic unit.
// inert p: a point of trace divisible by p reduces into the imaginary line
// of the residue field, so its embedding power is alternately real or
// imaginary mod p and no pair of points can be solved with a unit
// determinant. instead a conjugate pair sharing one rational value c is
// used: imaginary parts cancel identically and c * tr(u) matches a rational
// target, where d = val(tr(u)) is 0 for even nu, small positive for odd nu,
// and lands in the denominator of c. the point with minimal d is kept.

struct ReadPoints {
  bool ok = false;
  QuadElem x1{};
  long dval = 0;  // inert: valuation of tr(embedding power) at x1
};

ReadPoints pick_read_points(const OpContext& ctx, long nu, long m) {
  const QuadField& L = ctx.field();
  ReadPoints out;
  std::vector<QuadElem> units;
  for (const QuadElem& xi : L.enumerate_totally_positive_by_trace(m)) {
    bool unit = true;
    for (const PrimeAbove& pr : ctx.primes())
      if (L.ord_at(xi, pr) != 0) {
        unit = false;
        break;
      }
    if (unit) units.push_back(xi);
  }
  if (ctx.splitting() == Splitting::Split) {
    if (units.empty()) return out;
    out.ok = true;
    out.x1 = units.front();
    return out;
  }
  long cap = std::max(1L, ctx.prec() / 2 - 1);
  for (const QuadElem& xi : units) {
    if (L.is_rational(xi)) continue;  // never a unit at a p-multiple trace
    Coeff u = ctx.embed_power(xi, nu, 0);
    long d;
    if (const auto* r = std::get_if<Rational>(&u)) {
      d = rat_val(*r, ctx.p());  // nu == 0 only
    } else {
      PadicNum tru = std::get<PadicQuad>(u).trace();
      if (tru.vanishes()) continue;
      d = tru.val();
    }
    if (d > cap) continue;
    if (!out.ok || d < out.dval) {
      out.ok = true;
      out.x1 = xi;
      out.dval = d;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FormFixture

EigenData FormFixture::table() const {
  EigenData t;
  t.name = name;
  t.wt = wt;
  t.level = level;
  t.ap = ap;
  t.psi0 = psi0;
  return t;
}

EllipticQExp FormFixture::elliptic() const {
  if (kind != "elliptic") fail(Err::Schema, "fixture " + name + " is not elliptic");
  EllipticQExp f(wt, level, trunc);
  for (const auto& [n, v] : ecoeffs) f.set(n, Coeff(v));
  return f;
}

HilbertQExp FormFixture::hilbert(const QuadField& L) const {
  if (kind != "hilbert") fail(Err::Schema, "fixture " + name + " is not hilbert");
  if (L.D() != D)
    fail(Err::Schema, "fixture " + name + " lives over D=" + std::to_string(D) +
                          ", asked for D=" + std::to_string(L.D()));
  HilbertQExp g(L, wt, std::to_string(level), trunc);
  for (const auto& [k, v] : hcoeffs) g.set_key(k, Coeff(v));
  return g;
}

// ---------------------------------------------------------------------------
// JSON wire format

std::string fixture_to_json(const FormFixture& fx) {
  json j;
  j["schema"] = fx.schema;
  j["name"] = fx.name;
  j["kind"] = fx.kind;
  j["D"] = fx.D;
  j["role"] = fx.role;
  j["wt"] = {{"hilbert", fx.wt.is_hilbert}, {"l1", fx.wt.l1}, {"l2", fx.wt.l2},
             {"x1", fx.wt.x1},              {"x2", fx.wt.x2}};
  j["level"] = fx.level;
  j["trunc"] = fx.trunc;
  j["normalized"] = fx.normalized;
  j["conjugated"] = fx.conjugated;
  json coeffs = json::object();
  if (fx.kind == "elliptic") {
    for (const auto& [n, v] : fx.ecoeffs) coeffs[std::to_string(n)] = rat_str(v);
  } else {
    for (const auto& [k, v] : fx.hcoeffs)
      coeffs[std::to_string(k.tr) + "," + std::to_string(k.b)] = rat_str(v);
  }
  j["coeffs"] = std::move(coeffs);
  json ap = json::object(), psi0 = json::object();
  for (const auto& [lab, v] : fx.ap) ap[lab] = rat_str(v);
  for (const auto& [lab, v] : fx.psi0) psi0[lab] = rat_str(v);
  j["ap"] = std::move(ap);
  j["psi0"] = std::move(psi0);
  return j.dump();
}

FormFixture fixture_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(Err::Schema, std::string("fixture line is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Err::Schema, "fixture line must be a JSON object");
  for (const char* req : {"schema", "name", "kind", "D", "wt", "level", "trunc", "coeffs"})
    if (!j.contains(req)) fail(Err::Schema, std::string("fixture is missing \"") + req + "\"");

  FormFixture fx;
  fx.schema = static_cast<int>(parse_long_field(j["schema"], "schema"));
  if (fx.schema != 1) fail(Err::Schema, "unsupported fixture schema " + std::to_string(fx.schema));
  fx.name = parse_string_field(j["name"], "name");
  fx.kind = parse_string_field(j["kind"], "kind");
  if (fx.kind != "elliptic" && fx.kind != "hilbert")
    fail(Err::Schema, "unknown fixture kind \"" + fx.kind + "\"");
  fx.D = parse_long_field(j["D"], "D");
  fx.role = j.contains("role") ? parse_string_field(j["role"], "role") : "";
  const json& w = j["wt"];
  if (!w.is_object()) fail(Err::Schema, "wt must be an object");
  bool hil = parse_bool_field(w.value("hilbert", json(false)), "wt.hilbert");
  long l1 = parse_long_field(w.value("l1", json(0)), "wt.l1");
  long l2 = parse_long_field(w.value("l2", json(0)), "wt.l2");
  long x1 = parse_long_field(w.value("x1", json(0)), "wt.x1");
  long x2 = parse_long_field(w.value("x2", json(0)), "wt.x2");
  fx.wt = hil ? WeightData::hilbert(l1, l2, x1, x2) : WeightData::elliptic(l1, x1);
  fx.level = parse_long_field(j["level"], "level");
  fx.trunc = parse_long_field(j["trunc"], "trunc");
  fx.normalized = j.contains("normalized") ? parse_bool_field(j["normalized"], "normalized") : true;
  fx.conjugated = j.contains("conjugated") ? parse_bool_field(j["conjugated"], "conjugated") : false;
  const json& coeffs = j["coeffs"];
  if (!coeffs.is_object()) fail(Err::Schema, "coeffs must be an object");
  for (const auto& [key, val] : coeffs.items()) {
    Rational v = parse_rat_field(val, "coefficient " + key);
    if (fx.kind == "elliptic") {
      fx.ecoeffs[parse_decimal_key(key, "coeffs")] = v;
    } else {
      auto comma = key.find(',');
      if (comma == std::string::npos)
        fail(Err::Schema, "hilbert coefficient keys look like \"tr,b\", got \"" + key + "\"");
      XiKey k{parse_decimal_key(key.substr(0, comma), "coeffs"),
              parse_decimal_key(key.substr(comma + 1), "coeffs")};
      fx.hcoeffs[k] = v;
    }
  }
  if (j.contains("ap")) {
    if (!j["ap"].is_object()) fail(Err::Schema, "ap must be an object");
    for (const auto& [lab, val] : j["ap"].items())
      fx.ap[lab] = parse_rat_field(val, "ap[" + lab + "]");
  }
  if (j.contains("psi0")) {
    if (!j["psi0"].is_object()) fail(Err::Schema, "psi0 must be an object");
    for (const auto& [lab, val] : j["psi0"].items())
      fx.psi0[lab] = parse_rat_field(val, "psi0[" + lab + "]");
  }
  return fx;
}

std::vector<FormFixture> load_fixtures(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::Schema, "cannot open fixture file: " + path);
  std::vector<FormFixture> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      FormFixture fx = fixture_from_json(line);
      validate_fixture(fx);
      out.push_back(std::move(fx));
    } catch (const MfError& e) {
      fail(e.kind, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_fixtures(const std::string& path, const std::vector<FormFixture>& v) {
  std::ofstream out(path);
  if (!out) fail(Err::Schema, "cannot open fixture file for writing: " + path);
  for (const FormFixture& fx : v) {
    validate_fixture(fx);
    out << fixture_to_json(fx) << "\n";
  }
  if (!out) fail(Err::Schema, "write failed: " + path);
}

// ---------------------------------------------------------------------------
// semantic validation

void validate_fixture(const FormFixture& fx) {
  const std::string who = "fixture " + fx.name;
  if (fx.schema != 1) fail(Err::Schema, who + ": unsupported schema");
  if (fx.name.empty()) fail(Err::Schema, "fixture needs a name");
  if (fx.level < 1) fail(Err::Schema, who + ": level must be positive");
  if (fx.trunc < 0) fail(Err::Schema, who + ": negative trunc");

  if (fx.kind == "elliptic") {
    if (fx.wt.is_hilbert) fail(Err::Schema, who + ": elliptic fixture with hilbert weight");
    if (fx.D != 0) fail(Err::Schema, who + ": elliptic fixture with nonzero D");
    if (!fx.hcoeffs.empty()) fail(Err::Schema, who + ": elliptic fixture with hilbert coefficients");
    for (const auto& [n, v] : fx.ecoeffs) {
      (void)v;
      if (n < 1 || n > fx.trunc)
        fail(Err::Schema, who + ": coefficient " + std::to_string(n) + " outside [1, trunc]");
    }
    if (fx.normalized && fx.trunc >= 1) {
      auto it = fx.ecoeffs.find(1);
      Rational lead = it == fx.ecoeffs.end() ? Rational(0) : it->second;
      if (lead != 1)
        fail(Err::Schema, who + ": marked normalized but a(1) = " + rat_str(lead));
    }
    for (const auto& [lab, a] : fx.ap) {
      long q = parse_decimal_key(lab, who + ": ap");
      if (!is_prime_l(q)) fail(Err::Schema, who + ": table label " + lab + " is not prime");
      if (q <= fx.trunc) {
        auto it = fx.ecoeffs.find(q);
        Rational stored = it == fx.ecoeffs.end() ? Rational(0) : it->second;
        if (stored != a)
          fail(Err::Schema, who + ": table eigenvalue at " + lab + " is " + rat_str(a) +
                                " but the stored coefficient is " + rat_str(stored));
      }
    }
    for (const auto& [lab, v] : fx.psi0) {
      (void)v;
      long q = parse_decimal_key(lab, who + ": psi0");
      if (!is_prime_l(q)) fail(Err::Schema, who + ": psi0 label " + lab + " is not prime");
    }
    return;
  }

  if (fx.kind != "hilbert") fail(Err::Schema, who + ": unknown kind \"" + fx.kind + "\"");
  if (!fx.wt.is_hilbert) fail(Err::Schema, who + ": hilbert fixture with elliptic weight");
  if (!fx.ecoeffs.empty()) fail(Err::Schema, who + ": hilbert fixture with elliptic coefficients");
  QuadField L = QuadField::make(fx.D);
  HilbertQExp probe(L, fx.wt, std::to_string(fx.level), fx.trunc);
  for (const auto& [k, v] : fx.hcoeffs) {
    (void)v;
    const std::string keyname = "(" + std::to_string(k.tr) + "," + std::to_string(k.b) + ")";
    if (k.tr < 1 || k.tr > fx.trunc)
      fail(Err::Schema, who + ": coefficient " + keyname + " outside the trace window");
    QuadElem xi;
    try {
      xi = probe.xi_of(k);
    } catch (const MfError&) {
      fail(Err::Schema, who + ": coefficient key " + keyname + " is not canonical");
    }
    if (!L.integral(xi) || !L.totally_positive(xi))
      fail(Err::Schema, who + ": coefficient key " + keyname +
                            " is not an integral totally positive representative");
  }
  if (fx.normalized && fx.trunc >= 2) {
    auto it = fx.hcoeffs.find(XiKey{2, 0});
    Rational lead = it == fx.hcoeffs.end() ? Rational(0) : it->second;
    if (lead != 1) fail(Err::Schema, who + ": marked normalized but c(1) = " + rat_str(lead));
  }
  for (const auto& [lab, a] : fx.ap) {
    ParsedLabel pl = parse_prime_ideal_label(lab, who + ": ap");
    if (L.splitting_type(pl.q) == Splitting::Ramified)
      fail(Err::Schema, who + ": ramified prime " + lab + " does not belong in the table");
    std::vector<PrimeAbove> prs = L.primes_above(pl.q);
    const PrimeAbove* pr = nullptr;
    for (const PrimeAbove& cand : prs)
      if (cand.index == pl.index) pr = &cand;
    if (pr == nullptr || pr->label() != lab)
      fail(Err::Schema, who + ": label " + lab + " does not match the splitting of " +
                            std::to_string(pl.q));
    Rational tr = L.trace(pr->pi);
    if (tr.get_den() == 1 && tr.get_num().fits_slong_p() && tr.get_num().get_si() <= fx.trunc) {
      XiKey k = probe.key_of(pr->pi);
      auto it = fx.hcoeffs.find(k);
      Rational stored = it == fx.hcoeffs.end() ? Rational(0) : it->second;
      if (stored != a)
        fail(Err::Schema, who + ": table eigenvalue at " + lab + " is " + rat_str(a) +
                              " but the coefficient at its generator is " + rat_str(stored));
    }
  }
  for (const auto& [lab, v] : fx.psi0) {
    (void)v;
    parse_prime_ideal_label(lab, who + ": psi0");
  }
}

// ---------------------------------------------------------------------------
// eta products

EtaPair generate_eta_products(long trunc) {
  if (trunc < 1) fail(Err::Schema, "eta products need a positive trunc");
  long T = trunc - 1;  // both forms carry a leading factor q
  ZSeries P = euler_product_series(T);
  ZSeries P2 = mul_trunc(P, P, T);
  ZSeries P4 = mul_trunc(P2, P2, T);
  ZSeries P8 = mul_trunc(P4, P4, T);
  ZSeries P16 = mul_trunc(P8, P8, T);
  ZSeries P24 = mul_trunc(P16, P8, T);
  ZSeries PP11 = mul_trunc(P, rescale_exponents(P, 11, T), T);
  ZSeries L11 = mul_trunc(PP11, PP11, T);

  EtaPair out;
  out.delta.name = "delta";
  out.delta.kind = "elliptic";
  out.delta.wt = WeightData::elliptic(12, 1);
  out.delta.level = 1;
  out.delta.trunc = trunc;
  out.level11.name = "f11";
  out.level11.kind = "elliptic";
  out.level11.wt = WeightData::elliptic(2, 1);
  out.level11.level = 11;
  out.level11.trunc = trunc;
  for (long n = 1; n <= trunc; ++n) {
    if (P24[n - 1] != 0) out.delta.ecoeffs[n] = Rational(P24[n - 1]);
    if (L11[n - 1] != 0) out.level11.ecoeffs[n] = Rational(L11[n - 1]);
  }
  for (long q = 2; q <= trunc; ++q) {
    if (!is_prime_l(q)) continue;
    auto dit = out.delta.ecoeffs.find(q);
    out.delta.ap[std::to_string(q)] = dit == out.delta.ecoeffs.end() ? Rational(0) : dit->second;
    out.delta.psi0[std::to_string(q)] = rat_pow(Rational(q), 10);
    auto lit = out.level11.ecoeffs.find(q);
    out.level11.ap[std::to_string(q)] =
        lit == out.level11.ecoeffs.end() ? Rational(0) : lit->second;
    if (q != 11) out.level11.psi0[std::to_string(q)] = 1;
  }
  return out;
}

long curve_point_count(long p) {
  if (!is_prime_l(p)) fail(Err::Schema, "point count needs a prime");
  auto md = [p](long v) { return ((v % p) + p) % p; };
  long count = 1;  // the point at infinity
  for (long x = 0; x < p; ++x) {
    long rhs = md(md(md(x * x % p * x) - md(x * x)) - md(10 * x + 20));
    for (long y = 0; y < p; ++y)
      if (md(y * y + y) == rhs) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// quadratic base change

namespace {

// eigenvalues at prime-power ideals via the Hecke recursion
// a(P^{e+1}) = a(P) a(P^e) - N(P) psi0(P) a(P^{e-1})
class PrimePowerTable {
 public:
  PrimePowerTable(Rational a1, Rational npsi) : a1_(std::move(a1)), npsi_(std::move(npsi)) {
    tab_ = {Rational(1), a1_};
  }
  const Rational& at(long e) {
    while (static_cast<long>(tab_.size()) <= e) {
      size_t i = tab_.size() - 1;
      tab_.push_back(a1_ * tab_[i] - npsi_ * tab_[i - 1]);
    }
    return tab_[e];
  }

 private:
  Rational a1_, npsi_;
  std::vector<Rational> tab_;
};

}  // namespace

FormFixture generate_base_change(const FormFixture& f, const QuadField& L, long trunc) {
  if (f.kind != "elliptic") fail(Err::Schema, "base change starts from an elliptic fixture");
  long k = f.wt.k();
  for (const auto& [lab, v] : f.psi0) {
    long q = parse_decimal_key(lab, "psi0");
    if (v != rat_pow(Rational(q), k - 2))
      fail(Err::NonTrivialCharacter,
           "base change implemented for trivial nebentypus only; psi0[" + lab + "] = " +
               rat_str(v) + " != " + std::to_string(q) + "^" + std::to_string(k - 2));
  }
  EigenData tab = f.table();
  auto a_of = [&tab](long q) -> const Rational& { return tab.eig(std::to_string(q)); };

  // memoized prime-power eigenvalues: key (q, leg) with leg 0 = norm-q prime
  // (split or ramified), leg 1 = the inert prime
  std::map<std::pair<long, int>, PrimePowerTable> pp;
  auto power_at = [&](long q, int leg, long e) -> Rational {
    if (f.level % q == 0) return rat_pow(a_of(q), e);  // level primes: plain powers
    auto it = pp.find({q, leg});
    if (it == pp.end()) {
      Rational a1 = leg == 0 ? a_of(q) : a_of(q) * a_of(q) - 2 * rat_pow(Rational(q), k - 1);
      Rational npsi = rat_pow(Rational(q), leg == 0 ? k - 1 : 2 * k - 2);
      it = pp.emplace(std::piecewise_construct, std::forward_as_tuple(q, leg),
                      std::forward_as_tuple(a1, npsi))
               .first;
    }
    return it->second.at(e);
  };

  FormFixture bc;
  bc.name = f.name + ".bc" + std::to_string(L.D());
  bc.kind = "hilbert";
  bc.D = L.D();
  bc.wt = WeightData::hilbert(k, k, f.wt.w(), f.wt.w());
  bc.level = f.level;
  bc.trunc = trunc;

  HilbertQExp probe(L, bc.wt, std::to_string(bc.level), trunc);
  std::map<long, std::vector<PrimeAbove>> split_primes;
  for (long n = 1; n <= trunc; ++n) {
    for (const QuadElem& xi : L.enumerate_totally_positive_by_trace(n)) {
      Rational nr = L.norm(xi);
      if (nr.get_den() != 1 || !nr.get_num().fits_slong_p())
        fail(Err::Internal, "norm out of range in base change");
      Rational c = 1;
      for (const auto& [q, e] : factorize_l(nr.get_num().get_si())) {
        if (f.level % q == 0) {
          c *= rat_pow(a_of(q), e);
          continue;
        }
        switch (L.splitting_type(q)) {
          case Splitting::Ramified:
            c *= power_at(q, 0, e);
            break;
          case Splitting::Inert:
            if (e % 2) fail(Err::Internal, "odd inert valuation");
            c *= power_at(q, 1, e / 2);
            break;
          case Splitting::Split: {
            auto it = split_primes.find(q);
            if (it == split_primes.end())
              it = split_primes.emplace(q, L.primes_above(q)).first;
            long e1 = L.ord_at(xi, it->second[0]);
            long e2 = L.ord_at(xi, it->second[1]);
            if (e1 + e2 != e) fail(Err::Internal, "split valuations disagree with the norm");
            c *= power_at(q, 0, e1) * power_at(q, 0, e2);
            break;
          }
        }
      }
      if (c != 0) bc.hcoeffs[probe.key_of(xi)] = c;
    }
  }

  for (long q = 2; q <= f.trunc; ++q) {
    if (!is_prime_l(q) || f.level % q == 0) continue;
    Splitting st = L.splitting_type(q);
    if (st == Splitting::Ramified) continue;  // no table label for ramified primes
    for (const PrimeAbove& pr : L.primes_above(q)) {
      bc.ap[pr.label()] = st == Splitting::Split
                              ? a_of(q)
                              : a_of(q) * a_of(q) - 2 * rat_pow(Rational(q), k - 1);
      bc.psi0[pr.label()] = rat_pow(pr.nrm, k - 2);
    }
  }
  return bc;
}

// ---------------------------------------------------------------------------
// synthetic eigen systems

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// xorshift-style mixer; avoids std::uniform_int_distribution, whose output
// is not pinned across standard library implementations
std::uint64_t mix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

EigenData synth_elliptic_table(const std::string& name, unsigned seed, long trunc) {
  EigenData t;
  t.name = name;
  t.wt = WeightData::elliptic(2, 1);
  t.level = 1;
  std::uint64_t state = fnv1a(name) ^ (0x5851f42d4c957f2dULL * (seed + 1));
  for (long q = 2; q <= trunc; ++q) {
    if (!is_prime_l(q)) continue;
    long a = static_cast<long>(mix(state) % 9) - 4;
    t.ap[std::to_string(q)] = a;
    t.psi0[std::to_string(q)] = 1;
  }
  return t;
}

void set_p_roots(EigenData& f, long p, const Rational& alpha0, const Rational& beta0) {
  std::string lab = std::to_string(p);
  f.ap[lab] = alpha0 + beta0;
  f.psi0[lab] = alpha0 * beta0 / p;
}

EigenData stabilized_table(const EigenData& f, long p, const Rational& root) {
  if (f.level % p == 0) fail(Err::Schema, "table is already stabilized at " + std::to_string(p));
  std::string lab = std::to_string(p);
  if (!f.has(lab)) fail(Err::MissingEigenvalue, "no eigenvalue stored for " + lab);
  Rational c = Rational(p) * f.chi(lab);
  if (root * root - f.eig(lab) * root + c != 0)
    fail(Err::Schema, "root " + rat_str(root) + " does not solve the Hecke quadratic at " + lab);
  EigenData g = f;
  g.name = f.name + "#" + lab + ":" + rat_str(root);
  g.level = f.level * p;
  g.ap[lab] = root;
  g.psi0.erase(lab);
  return g;
}

EllipticQExp stabilized_expansion(const EigenData& f, long p, const Rational& root, long trunc) {
  return eigen_expansion(stabilized_table(f, p, root), trunc);
}

// ---------------------------------------------------------------------------
// eigen extension over a depleted seed

HilbertQExp eigen_extension_at_p(const HilbertQExp& seed, const OpContext& ctx,
                                 const RootPair& r1, const RootPair& r2) {
  const QuadField& L = ctx.field();
  for (const auto& [k, v] : seed.coeffs()) {
    (void)v;
    QuadElem xi = seed.xi_of(k);
    for (const PrimeAbove& pr : ctx.primes())
      if (L.ord_at(xi, pr) != 0)
        fail(Err::Schema, "eigen extension needs a seed depleted at every prime above " +
                              std::to_string(ctx.p()));
  }
  long T = seed.trunc();
  auto shift_once = [&](const HilbertQExp& g, const PrimeAbove& pr) {
    HilbertQExp s = hil_plain_shift(g, pr, 1);
    if (s.trunc() < T)
      fail(Err::InsufficientTruncation, "shift by " + pr.label() + " narrows the window");
    return s.with_trunc(T);
  };
  // complete homogeneous symmetric values h_j(alpha, beta) on demand
  auto h_next = [](const RootPair& r, Rational& hp, Rational& hc) {
    Rational nx = (r.alpha + r.beta) * hc - r.alpha * r.beta * hp;
    hp = hc;
    hc = nx;
  };

  HilbertQExp out(L, seed.weight(), seed.level(), T);
  if (ctx.splitting() == Splitting::Inert) {
    HilbertQExp cur = seed;
    Rational hp = 0, hc = 1;  // h_{-1}, h_0
    for (;;) {
      if (hc != 0) out = hil_add(out, hil_scale(cur, Coeff(hc)));
      cur = shift_once(cur, ctx.prime(0));
      if (cur.coeffs().empty()) break;
      h_next(r1, hp, hc);
    }
    return out;
  }

  HilbertQExp cur1 = seed;
  Rational h1p = 0, h1c = 1;
  for (;;) {
    HilbertQExp cur2 = cur1;
    Rational h2p = 0, h2c = 1;
    for (;;) {
      Rational c = h1c * h2c;
      if (c != 0) out = hil_add(out, hil_scale(cur2, Coeff(c)));
      cur2 = shift_once(cur2, ctx.prime(2));
      if (cur2.coeffs().empty()) break;
      h_next(r2, h2p, h2c);
    }
    cur1 = shift_once(cur1, ctx.prime(1));
    if (cur1.coeffs().empty()) break;
    h_next(r1, h1p, h1c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// seed fitting

std::vector<long> dead_read_traces(const OpContext& ctx, long nu, long trunc) {
  std::vector<long> out;
  for (long m = ctx.p(); m <= trunc; m += ctx.p())
    if (!pick_read_points(ctx, nu, m).ok) out.push_back(m);
  return out;
}

HilbertQExp fit_restriction_seed(const EllipticQExp& target, const OpContext& ctx,
                                 int theta_side, long nu, long match_prec,
                                 const WeightData& wt, const std::string& level) {
  if (theta_side != 1 && theta_side != 2) fail(Err::Schema, "theta side must be 1 or 2");
  if (match_prec < 1) fail(Err::Schema, "match precision must be positive");
  if (ctx.prec() < match_prec + 1)
    fail(Err::PrecisionExhausted, "context precision too low for the requested match");
  long p = ctx.p();
  long e1 = theta_side == 1 ? nu : 0;
  long e2 = theta_side == 1 ? 0 : nu;
  HilbertQExp seed(ctx.field(), wt, level, target.trunc());

  for (long m = p; m <= target.trunc(); m += p) {
    Coeff tc = target.at(m);
    const Rational* tv = std::get_if<Rational>(&tc);
    if (tv == nullptr) fail(Err::Schema, "seed fitting needs a rational-valued target");
    ReadPoints sel = pick_read_points(ctx, nu, m);
    if (!sel.ok) {
      if (*tv != 0)
        fail(Err::Internal,
             "target does not vanish at dead read trace " + std::to_string(m));
      continue;
    }
    if (*tv == 0) continue;
    if (rat_val(*tv, p) < 0)
      fail(Err::Schema, "target coefficient at trace " + std::to_string(m) +
                            " is not p-integral");
    if (ctx.splitting() == Splitting::Split) {
      Coeff u = ctx.embed_power(sel.x1, e1, e2);
      if (const auto* ur = std::get_if<Rational>(&u)) {
        seed.set(sel.x1, Coeff(*tv / *ur));  // rational multiplier: exact solve
      } else {
        const PadicNum& up = std::get<PadicNum>(u);
        PadicNum tvp = PadicNum::from_rational(*tv, p, match_prec + 1);
        seed.set(sel.x1, Coeff(Rational((tvp / up).residue(match_prec))));
      }
    } else {
      // conjugate pair with a shared value: c * (u + conj u) = tv, so the
      // imaginary parts cancel identically and c = tv / tr(u) with val >= -d
      long d = sel.dval;
      long wp = match_prec + 2 * d + 4;
      OpContext lctx(ctx.field(), p, wp);
      Coeff uc = lctx.embed_power(sel.x1, e1, e2);
      PadicNum tru = std::holds_alternative<Rational>(uc)
                         ? PadicNum::from_rational(std::get<Rational>(uc) * 2, p, wp)
                         : std::get<PadicQuad>(uc).trace();
      PadicNum cp = PadicNum::from_rational(*tv, p, wp) / tru;
      Rational pd = rat_pow(Rational(p), d);
      PadicNum lift = cp * PadicNum::from_rational(pd, p, wp);
      Rational c = Rational(lift.residue(match_prec + d)) / pd;
      seed.set(sel.x1, Coeff(c));
      seed.set(ctx.field().conj(sel.x1), Coeff(c));
    }
  }
  return seed;
}

}  // namespace mf

#pragma once
#include <string>

#include "mf/errors.hpp"

namespace mf {

// weight metadata for elliptic forms (k, w) and Hilbert forms (l, x).
// the V-operator scalar exponents are v = 1 - w resp. v_i = 1 - x_i; the
// theta operator shifts (l, x) by (2r, r), so these exponents update
// automatically and the operator commutations hold on the nose.
struct WeightData {
  bool is_hilbert = false;
  long l1 = 0, l2 = 0;  // elliptic: k = l1, l2 unused
  long x1 = 0, x2 = 0;  // elliptic: w = x1, x2 unused

  static WeightData elliptic(long k, long w) {
    WeightData wt;
    wt.is_hilbert = false;
    wt.l1 = k;
    wt.x1 = w;
    return wt;
  }
  static WeightData hilbert(long l1, long l2, long x1, long x2) {
    if (l1 - 2 * x1 != l2 - 2 * x2)
      fail(Err::Schema, "hilbert weight needs l - 2x parallel");
    WeightData wt;
    wt.is_hilbert = true;
    wt.l1 = l1;
    wt.l2 = l2;
    wt.x1 = x1;
    wt.x2 = x2;
    return wt;
  }

  long k() const {
    if (is_hilbert) fail(Err::Internal, "elliptic accessor on hilbert weight");
    return l1;
  }
  long w() const {
    if (is_hilbert) fail(Err::Internal, "elliptic accessor on hilbert weight");
    return x1;
  }
  long m() const { return k() - 2 * w(); }
  long n() const {
    if (!is_hilbert) fail(Err::Internal, "hilbert accessor on elliptic weight");
    return l1 - 2 * x1;
  }
  bool parallel() const { return !is_hilbert || (l1 == l2 && x1 == x2); }

  // exponents of the V(m) coefficient scalar m_p^{-v}
  long v1() const { return 1 - x1; }
  long v2() const { return 1 - x2; }

  WeightData theta_shift(long r1, long r2) const {
    WeightData wt = *this;
    wt.l1 += 2 * r1;
    wt.x1 += r1;
    if (is_hilbert) {
      wt.l2 += 2 * r2;
      wt.x2 += r2;
    } else if (r2 != 0) {
      fail(Err::Schema, "elliptic theta takes a single exponent");
    }
    return wt;
  }

  // central-character retag by a parallel shift of x (resp. w)
  WeightData retag(long delta) const {
    WeightData wt = *this;
    wt.x1 += delta;
    if (is_hilbert) wt.x2 += delta;
    return wt;
  }

  bool operator==(const WeightData&) const = default;
  std::string str() const {
    if (is_hilbert)
      return "l=(" + std::to_string(l1) + "," + std::to_string(l2) + ") x=(" +
             std::to_string(x1) + "," + std::to_string(x2) + ")";
    return "k=" + std::to_string(l1) + " w=" + std::to_string(x1);
  }
};

// balanced: none among a, b, c is >= the sum of the other two
inline bool balanced_triple(long a, long b, long c) {
  return a < b + c && b < a + c && c < a + b;
}

}  // namespace mf

#pragma once

// Error-free transformations and bit-level rounding helpers on binary64.
// These are the primitives behind random rounding: every inexact operation
// has exactly two faithful roundings, and the residual sign tells us on
// which side of the rounded result the exact value lies.

#include <array>
#include <cfenv>
#include <cmath>
#include <limits>

#include "fmmlab/error.hpp"

namespace fmmlab::eft {

struct SumSplit {
  double s;  // round-to-nearest sum
  double e;  // exact residual, s + e == a + b
};

struct ProdSplit {
  double p;  // round-to-nearest product
  double e;  // exact residual, p + e == a * b
};

enum class Direction { up, down };

inline void require_not_nan(double x) {
  if (std::isnan(x)) throw Error("invalid-operand", "NaN operand");
}

// Knuth's branch-free TwoSum.
inline SumSplit two_sum(double a, double b) {
  require_not_nan(a);
  require_not_nan(b);
  double s = a + b;
  if (std::isinf(s) && std::isfinite(a) && std::isfinite(b))
    throw Error("eft-overflow", "a+b overflows binary64");
  double bp = s - a;
  double ap = s - bp;
  double e = (a - ap) + (b - bp);
  return {s, e};
}

// TwoProd via fused multiply-add. The residual of a*b is exact as long as
// it does not fall below the subnormal range; 2^-969 is the usual safe
// threshold (residual exponent >= e_min + 105). An exact product (no
// inexact flag) is fine at any magnitude.
inline ProdSplit two_prod(double a, double b) {
  require_not_nan(a);
  require_not_nan(b);
  std::feclearexcept(FE_INEXACT);
  double p = a * b;
  bool inexact = std::fetestexcept(FE_INEXACT) != 0;
  if (std::isinf(p) && std::isfinite(a) && std::isfinite(b))
    throw Error("eft-overflow", "a*b overflows binary64");
  if (inexact && p != 0.0 && std::fabs(p) < 0x1p-969)
    throw Error("eft-underflow", "a*b residual may be inexact");
  double e = std::fma(a, b, -p);
  return {p, e};
}

// Next representable binary64 strictly above/below z.
inline double adjacent(double z, Direction dir) {
  require_not_nan(z);
  double r = std::nextafter(
      z, dir == Direction::up ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity());
  if (std::isinf(r) && std::isfinite(z))
    throw Error("eft-overflow", "adjacent leaves the finite range");
  return r;
}

// Sign of the exact sum of a few doubles, by VecSum distillation: repeated
// TwoSum passes make the components non-overlapping, after which the sign
// of the exact sum equals the sign of the largest component.
template <std::size_t N>
inline int exact_sum_sign(std::array<double, N> v) {
  for (int pass = 0; pass < 64; ++pass) {
    bool residue = false;
    for (std::size_t i = 1; i < N; ++i) {
      double s = v[i - 1] + v[i];
      double bp = s - v[i - 1];
      double ap = s - bp;
      double e = (v[i - 1] - ap) + (v[i] - bp);
      v[i] = s;
      v[i - 1] = e;
      if (e != 0.0) residue = true;
    }
    if (!residue) break;
  }
  double head = v[N - 1];
  return head > 0.0 ? 1 : head < 0.0 ? -1 : 0;
}

}  // namespace fmmlab::eft

#pragma once

// The pluggable numeric contract the solver runs against, plus the two
// stochastic scalar modes:
//
//  - RandomRoundScalar: every inexact operation lands on one of the two
//    faithful roundings of the exact result, chosen by a coin flip
//    (asynchronous analysis; one value per run, statistics across runs).
//  - StochasticTriple: three samples advance through the same sequence of
//    operations with independent coin flips (synchronous analysis); branch
//    disagreement, cancellation, and degenerate multiplications are counted.
//
// The solver and backtrace only touch scalars through scalar_ops<S>.

#include <cmath>
#include <cstdint>
#include <limits>

#include "fmmlab/eft.hpp"
#include "fmmlab/rng.hpp"
#include "fmmlab/site.hpp"

namespace fmmlab {

enum class ArithOp { add, sub, mul, div, sqrt };

struct InstabilityCounters {
  std::uint64_t unstable_branching = 0;
  std::uint64_t cancellation = 0;
  std::uint64_t unstable_multiplication = 0;
  std::uint64_t unstable_conversion = 0;

  std::uint64_t total() const {
    return unstable_branching + cancellation + unstable_multiplication +
           unstable_conversion;
  }
};

// ---------------------------------------------------------------------------
// Random rounding primitive.
//
// Let z be the round-to-nearest result and r the sign of (exact - z). If
// r == 0 the operation was exact and z is returned untouched. Otherwise the
// two faithful roundings are z and adjacent(z, side of r); each is returned
// with probability 1/2. Infinities and exact zeros pass through unperturbed.
// ---------------------------------------------------------------------------

inline int residual_sign(ArithOp op, double a, double b, double z) {
  switch (op) {
    case ArithOp::add:
      return eft::two_sum(a, b).e > 0   ? 1
             : eft::two_sum(a, b).e < 0 ? -1
                                        : 0;
    case ArithOp::sub:
      return residual_sign(ArithOp::add, a, -b, z);
    case ArithOp::mul: {
      auto [p, e] = eft::two_prod(a, b);
      (void)p;
      return e > 0 ? 1 : e < 0 ? -1 : 0;
    }
    case ArithOp::div: {
      // sign(a - z*b), adjusted for the divisor's sign.
      auto [p, e] = eft::two_prod(z, b);
      int s = eft::exact_sum_sign<3>({a, -p, -e});
      return b > 0 ? s : -s;
    }
    case ArithOp::sqrt: {
      // sign(a - z*z).
      auto [p, e] = eft::two_prod(z, z);
      return eft::exact_sum_sign<3>({a, -p, -e});
    }
  }
  return 0;
}

inline double ieee_apply(ArithOp op, double a, double b) {
  switch (op) {
    case ArithOp::add: return a + b;
    case ArithOp::sub: return a - b;
    case ArithOp::mul: return a * b;
    case ArithOp::div: return a / b;
    case ArithOp::sqrt: return std::sqrt(a);
  }
  return 0.0;
}

inline double rr_apply(ArithOp op, double a, double b, RngStream& rng,
                       bool perturb = true) {
  if (std::isnan(a) || (op != ArithOp::sqrt && std::isnan(b)))
    throw Error("invalid-operand", "NaN operand");
  double z = ieee_apply(op, a, b);
  if (!perturb) return z;
  // Infinity arithmetic follows IEEE untouched; exact zeros likewise.
  if (std::isinf(a) || (op != ArithOp::sqrt && std::isinf(b)) || std::isinf(z))
    return z;
  if (z == 0.0) return z;
  int r = residual_sign(op, a, b, z);
  if (r == 0) return z;
  if (!rng.next_bool()) return z;
  return eft::adjacent(z, r > 0 ? eft::Direction::up : eft::Direction::down);
}

// ---------------------------------------------------------------------------
// RandomRoundScalar
// ---------------------------------------------------------------------------

struct RrContext {
  RngStream rng;
  bool perturb = true;

  static RrContext*& active() {
    thread_local RrContext* p = nullptr;
    return p;
  }
};

// RAII activation of a context for the current thread.
template <class Ctx>
class ScopedContext {
 public:
  explicit ScopedContext(Ctx& c) : prev_(Ctx::active()) { Ctx::active() = &c; }
  ~ScopedContext() { Ctx::active() = prev_; }
  ScopedContext(const ScopedContext&) = delete;
  ScopedContext& operator=(const ScopedContext&) = delete;

 private:
  Ctx* prev_;
};

struct RandomRoundScalar {
  double v = 0.0;
};

// ---------------------------------------------------------------------------
// StochasticTriple
// ---------------------------------------------------------------------------

struct StContext {
  RngStream rng;
  InstabilityCounters counters;
  bool perturb = true;

  static StContext*& active() {
    thread_local StContext* p = nullptr;
    return p;
  }
};

struct StochasticTriple {
  double v[3] = {0.0, 0.0, 0.0};

  double mean() const { return (v[0] + v[1] + v[2]) / 3.0; }

  // Sample standard deviation (divisor n-1 = 2).
  double sigma() const {
    double m = mean();
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / 2.0);
  }
};

inline constexpr double kBinary64DecimalDigits = 15.7;
inline constexpr double kStudentT95Dof2 = 4.303;

// Estimated count of exact significant decimal digits from the spread of
// the three samples (CESTAC-style, Student t at 95% with 2 dof).
inline double significant_digits(const StochasticTriple& a) {
  double s = a.sigma();
  if (s == 0.0) return kBinary64DecimalDigits;
  double m = std::fabs(a.mean());
  if (m == 0.0) return 0.0;
  double d = std::log10(m / (s * kStudentT95Dof2));
  if (d < 0.0) return 0.0;
  if (d > kBinary64DecimalDigits) return kBinary64DecimalDigits;
  return d;
}

inline StochasticTriple st_apply(ArithOp op, const StochasticTriple& a,
                                 const StochasticTriple& b, StContext& ctx) {
  StochasticTriple r;
  for (int i = 0; i < 3; ++i)
    r.v[i] = rr_apply(op, a.v[i], b.v[i], ctx.rng, ctx.perturb);
  if (op == ArithOp::add || op == ArithOp::sub) {
    // Cancellation: a sharp digit loss between operands and result.
    double da = significant_digits(a);
    double db = significant_digits(b);
    if (da > 0.0 && db > 0.0 &&
        significant_digits(r) <= std::max(da, db) - 4.0)
      ++ctx.counters.cancellation;
  } else if (op == ArithOp::mul) {
    if (significant_digits(a) == 0.0 && significant_digits(b) == 0.0)
      ++ctx.counters.unstable_multiplication;
  }
  return r;
}

enum class Relation { less, less_equal, equal };

inline bool relation_holds(Relation rel, double a, double b) {
  switch (rel) {
    case Relation::less: return a < b;
    case Relation::less_equal: return a <= b;
    case Relation::equal: return a == b;
  }
  return false;
}

// Samplewise relation with majority vote; a disagreement is an unstable
// branching. All three samples then follow the single returned flow.
inline bool st_compare(Relation rel, const StochasticTriple& a,
                       const StochasticTriple& b, StContext& ctx) {
  int votes = 0;
  for (int i = 0; i < 3; ++i)
    if (relation_holds(rel, a.v[i], b.v[i])) ++votes;
  if (votes != 0 && votes != 3) ++ctx.counters.unstable_branching;
  return votes >= 2;
}

inline long st_truncate_to_integer(const StochasticTriple& a, StContext& ctx) {
  long t[3];
  for (int i = 0; i < 3; ++i) {
    if (a.v[i] < 0.0)
      throw Error("negative-unsigned-conversion", "negative sample");
    if (!std::isfinite(a.v[i]))
      throw Error("invalid-operand", "non-finite sample in conversion");
    t[i] = static_cast<long>(a.v[i]);
  }
  if (t[0] == t[1] && t[1] == t[2]) return t[0];
  ++ctx.counters.unstable_conversion;
  return static_cast<long>(a.mean());
}

// ---------------------------------------------------------------------------
// scalar_ops: the contract fmm/backtrace are written against.
// ---------------------------------------------------------------------------

template <class S>
struct scalar_ops;

template <>
struct scalar_ops<double> {
  static double from(double x) { return x; }
  static double infinity() { return std::numeric_limits<double>::infinity(); }
  static bool is_infinite(double x) { return std::isinf(x); }
  static double approx(double x) { return x; }
  static double add(double a, double b) { return a + b; }
  static double sub(double a, double b) { return a - b; }
  static double mul(double a, double b) { return a * b; }
  static double div(double a, double b) { return a / b; }
  static double sqrt(double a) { return std::sqrt(a); }
  static double neg(double a) { return -a; }
  static bool less(double a, double b, const Site&) { return a < b; }
  static bool less_equal(double a, double b, const Site&) { return a <= b; }
  static bool equal(double a, double b, const Site&) { return a == b; }
  static long trunc_index(double a, const Site&) {
    if (a < 0.0) throw Error("negative-unsigned-conversion", "negative index");
    return static_cast<long>(a);
  }
};

template <>
struct scalar_ops<RandomRoundScalar> {
  using S = RandomRoundScalar;
  static RrContext& ctx() { return *RrContext::active(); }
  static S from(double x) { return {x}; }
  static S infinity() { return {std::numeric_limits<double>::infinity()}; }
  static bool is_infinite(S x) { return std::isinf(x.v); }
  static double approx(S x) { return x.v; }
  static S apply(ArithOp op, S a, S b) {
    auto& c = ctx();
    return {rr_apply(op, a.v, b.v, c.rng, c.perturb)};
  }
  static S add(S a, S b) { return apply(ArithOp::add, a, b); }
  static S sub(S a, S b) { return apply(ArithOp::sub, a, b); }
  static S mul(S a, S b) { return apply(ArithOp::mul, a, b); }
  static S div(S a, S b) { return apply(ArithOp::div, a, b); }
  static S sqrt(S a) { return apply(ArithOp::sqrt, a, a); }
  static S neg(S a) { return {-a.v}; }
  static bool less(S a, S b, const Site&) { return a.v < b.v; }
  static bool less_equal(S a, S b, const Site&) { return a.v <= b.v; }
  static bool equal(S a, S b, const Site&) { return a.v == b.v; }
  static long trunc_index(S a, const Site&) {
    return scalar_ops<double>::trunc_index(a.v, sites::grid_index_x);
  }
};

template <>
struct scalar_ops<StochasticTriple> {
  using S = StochasticTriple;
  static StContext& ctx() { return *StContext::active(); }
  static S from(double x) { return {{x, x, x}}; }
  static S infinity() {
    double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf, inf}};
  }
  static bool is_infinite(const S& x) { return std::isinf(x.v[0]); }
  static double approx(const S& x) {
    return std::isinf(x.v[0]) ? x.v[0] : x.mean();
  }
  static S add(const S& a, const S& b) { return st_apply(ArithOp::add, a, b, ctx()); }
  static S sub(const S& a, const S& b) { return st_apply(ArithOp::sub, a, b, ctx()); }
  static S mul(const S& a, const S& b) { return st_apply(ArithOp::mul, a, b, ctx()); }
  static S div(const S& a, const S& b) { return st_apply(ArithOp::div, a, b, ctx()); }
  static S sqrt(const S& a) { return st_apply(ArithOp::sqrt, a, a, ctx()); }
  static S neg(const S& a) { return {{-a.v[0], -a.v[1], -a.v[2]}}; }
  static bool less(const S& a, const S& b, const Site&) {
    return st_compare(Relation::less, a, b, ctx());
  }
  static bool less_equal(const S& a, const S& b, const Site&) {
    return st_compare(Relation::less_equal, a, b, ctx());
  }
  static bool equal(const S& a, const S& b, const Site&) {
    return st_compare(Relation::equal, a, b, ctx());
  }
  static long trunc_index(const S& a, const Site&) {
    return st_truncate_to_integer(a, ctx());
  }
};

}  // namespace fmmlab

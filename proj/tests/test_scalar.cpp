#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "fmmlab/scalar.hpp"

using namespace fmmlab;

TEST_CASE("rr_apply returns a faithful rounding") {
  RngStream rng{11, 0};
  for (int i = 0; i < 5000; ++i) {
    double a = rng.next_uniform(-10.0, 10.0);
    double b = rng.next_uniform(0.1, 10.0);
    for (ArithOp op :
         {ArithOp::add, ArithOp::sub, ArithOp::mul, ArithOp::div}) {
      double z = ieee_apply(op, a, b);
      double r = rr_apply(op, a, b, rng);
      bool faithful = r == z ||
                      r == std::nextafter(z, std::numeric_limits<double>::infinity()) ||
                      r == std::nextafter(z, -std::numeric_limits<double>::infinity());
      CHECK(faithful);
    }
    double s = rr_apply(ArithOp::sqrt, b, b, rng);
    double zs = std::sqrt(b);
    CHECK((s == zs || s == std::nextafter(zs, 0.0) ||
           s == std::nextafter(zs, 10.0)));
  }
}

TEST_CASE("rr_apply is exact-preserving and seed-deterministic") {
  RngStream rng{3, 0};
  CHECK(rr_apply(ArithOp::add, 1.0, 2.0, rng) == 3.0);  // exact: untouched
  CHECK(rr_apply(ArithOp::mul, 0.5, 8.0, rng) == 4.0);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(rr_apply(ArithOp::add, inf, 1.0, rng) == inf);
  RngStream a{99, 0}, b{99, 0};
  for (int i = 0; i < 100; ++i)
    CHECK(rr_apply(ArithOp::add, 0.1, 0.2, a) ==
          rr_apply(ArithOp::add, 0.1, 0.2, b));
  RngStream c{5, 0};
  CHECK(rr_apply(ArithOp::add, 0.1, 0.2, c, /*perturb=*/false) == 0.1 + 0.2);
  try {
    rr_apply(ArithOp::add, std::nan(""), 1.0, c);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.name() == "invalid-operand");
  }
}

TEST_CASE("significant digits follow the CESTAC formula") {
  StochasticTriple exact{{100.0, 100.0, 100.0}};
  CHECK(significant_digits(exact) == kBinary64DecimalDigits);

  StochasticTriple spread{{100.0, 100.0 + 2e-13, 100.0 - 2e-13}};
  double expect = std::log10(std::fabs(spread.mean()) /
                             (spread.sigma() * kStudentT95Dof2));
  CHECK(significant_digits(spread) == doctest::Approx(expect));
  CHECK(significant_digits(spread) > 13.0);
  CHECK(significant_digits(spread) < 15.0);

  StochasticTriple garbage{{1.0, -1.0, 0.1}};
  CHECK(significant_digits(garbage) == 0.0);
  StochasticTriple zero{{0.0, 1e-20, -1e-20}};
  CHECK(significant_digits(zero) == 0.0);
}

TEST_CASE("st_compare votes and counts disagreements") {
  StContext ctx;
  ctx.rng = {1, 0};
  StochasticTriple a{{1.0, 1.0, 2.0}};
  StochasticTriple b{{1.5, 1.5, 1.5}};
  CHECK(st_compare(Relation::less, a, b, ctx));  // 2 of 3 votes
  CHECK(ctx.counters.unstable_branching == 1);
  CHECK_FALSE(st_compare(Relation::less, b, a, ctx));
  CHECK(ctx.counters.unstable_branching == 2);
  StochasticTriple c{{3.0, 3.0, 3.0}};
  CHECK(st_compare(Relation::less, a, c, ctx));  // unanimous
  CHECK(ctx.counters.unstable_branching == 2);
  CHECK(st_compare(Relation::equal, c, c, ctx));
  CHECK(ctx.counters.unstable_branching == 2);
}

TEST_CASE("st_truncate_to_integer counts split truncations") {
  StContext ctx;
  StochasticTriple same{{2.0, 2.25, 2.75}};
  CHECK(st_truncate_to_integer(same, ctx) == 2);
  CHECK(ctx.counters.unstable_conversion == 0);
  StochasticTriple split{{1.9999999999999998, 2.0, 2.0}};
  CHECK(st_truncate_to_integer(split, ctx) == 2);  // trunc of the mean
  CHECK(ctx.counters.unstable_conversion == 1);
  StochasticTriple neg{{-0.5, -0.5, -0.5}};
  try {
    st_truncate_to_integer(neg, ctx);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.name() == "negative-unsigned-conversion");
  }
}

TEST_CASE("st_apply flags cancellation and degenerate products") {
  StContext ctx;
  ctx.rng = {2, 0};
  ctx.perturb = false;  // keep the samples where we put them
  StochasticTriple a{{1.0, 1.0 + 1e-15, 1.0 - 1e-15}};
  StochasticTriple b{{1.0, 1.0 - 1e-15, 1.0 + 1e-15}};
  CHECK(significant_digits(a) > 4.0);
  StochasticTriple d = st_apply(ArithOp::sub, a, b, ctx);
  CHECK(significant_digits(d) == 0.0);
  CHECK(ctx.counters.cancellation == 1);

  StochasticTriple g{{1.0, -1.0, 0.1}};  // zero significant digits
  st_apply(ArithOp::mul, g, g, ctx);
  CHECK(ctx.counters.unstable_multiplication == 1);
  st_apply(ArithOp::mul, a, g, ctx);  // one healthy operand: not counted
  CHECK(ctx.counters.unstable_multiplication == 1);

  // Exact data stays exact and triggers nothing.
  StContext clean;
  clean.rng = {3, 0};
  StochasticTriple x{{3.0, 3.0, 3.0}}, y{{2.0, 2.0, 2.0}};
  StochasticTriple r = st_apply(ArithOp::sub, x, y, clean);
  CHECK(r.sigma() == 0.0);
  CHECK(clean.counters.total() == 0);
}

TEST_CASE("scalar_ops<StochasticTriple> uses the active context") {
  StContext ctx;
  ctx.rng = {4, 0};
  ScopedContext<StContext> guard(ctx);
  using Ops = scalar_ops<StochasticTriple>;
  auto x = Ops::from(2.0);
  auto r = Ops::sqrt(Ops::add(Ops::mul(x, x), Ops::from(5.0)));
  CHECK(Ops::approx(r) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(Ops::is_infinite(Ops::infinity()));
  CHECK_FALSE(Ops::is_infinite(r));
}

TEST_CASE("RngStream is counter-based and splittable") {
  RngStream a{123, 0};
  (void)a.next_bits();
  (void)a.next_bits();
  CHECK(a.next_bits() == RngStream::bits(123, 2));
  CHECK(RngStream::child_seed(9, 0) != RngStream::child_seed(9, 1));
  RngStream u{5, 0};
  for (int i = 0; i < 1000; ++i) {
    double v = u.next_uniform(2.0, 3.0);
    CHECK(v >= 2.0);
    CHECK(v <= 3.0);
  }
}

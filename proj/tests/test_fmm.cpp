#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fmmlab/fmm.hpp"

using namespace fmmlab;

namespace {

Scenario uniform_scenario(int n, double spacing, double tau = 1.0) {
  Scenario s;
  s.name = "uniform-test";
  s.grid.geom = {n, n, 0.0, 0.0, spacing, spacing};
  s.grid.tau.assign(static_cast<std::size_t>(n) * n, tau);
  s.start_ix = n / 2;
  s.start_iy = n / 2;
  s.goal_ix = n - 1;
  s.goal_iy = n - 1;
  return s;
}

}  // namespace

TEST_CASE("quadrant update solves the two-sided quadratic") {
  const double inv_sqrt2 = std::sqrt(0.5);
  CHECK(quadrant_update<double>(0.0, 0.0, 1.0, 1.0, 1.0) ==
        doctest::Approx(inv_sqrt2).epsilon(1e-15));
  // T_h = 0, T_v = 0.5: (0.5 + sqrt(1.75)) / 2
  CHECK(quadrant_update<double>(0.0, 0.5, 1.0, 1.0, 1.0) ==
        doctest::Approx((0.5 + std::sqrt(1.75)) / 2.0).epsilon(1e-15));
  // Far vertical neighbor: discriminant < 0, fall back one-sided.
  CHECK(quadrant_update<double>(0.0, 10.0, 1.0, 1.0, 1.0) == 1.0);
  // Root below the larger input: upwind rejection, one-sided again.
  CHECK(quadrant_update<double>(0.0, 0.95, 1.0, 1.0, 0.7) ==
        doctest::Approx(0.7));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(quadrant_update<double>(inf, 2.0, 1.0, 1.0, 3.0) == 5.0);
  CHECK(quadrant_update<double>(2.0, inf, 0.5, 1.0, 3.0) == 3.5);
  try {
    quadrant_update<double>(inf, inf, 1.0, 1.0, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.name() == "no-valued-neighbor");
  }
}

TEST_CASE("3x3 uniform: exact first-ring values") {
  Scenario s = uniform_scenario(3, 1.0);
  s.start_ix = 1;
  s.start_iy = 1;
  s.goal_ix = 2;
  s.goal_iy = 2;
  auto r = fmm_solve<double>(s);
  const auto& g = s.grid.geom;
  CHECK(r.field.T[g.index(1, 1)] == 0.0);
  for (auto [ix, iy] : {std::pair{0, 1}, {2, 1}, {1, 0}, {1, 2}})
    CHECK(r.field.T[g.index(ix, iy)] == 1.0);
  const double corner = 1.0 + std::sqrt(0.5);
  for (auto [ix, iy] : {std::pair{0, 0}, {2, 0}, {0, 2}, {2, 2}})
    CHECK(r.field.T[g.index(ix, iy)] == doctest::Approx(corner).epsilon(1e-15));
  CHECK(r.goal_reached);
  for (auto st : r.field.state) CHECK(st == NodeState::Accepted);
}

TEST_CASE("acceptance order is non-decreasing") {
  Scenario s = uniform_scenario(41, 0.025);
  auto r = fmm_solve<double>(s);
  for (std::size_t i = 1; i < r.accepted_sequence.size(); ++i)
    CHECK(r.accepted_sequence[i] >= r.accepted_sequence[i - 1]);
  CHECK(r.accepted_sequence.size() == s.grid.geom.node_count());
  CHECK(r.heap_pushes <= 8u * s.grid.geom.node_count());
}

TEST_CASE("arrival times scale linearly with the cost") {
  Scenario a = uniform_scenario(21, 0.05, 1.0);
  Scenario b = uniform_scenario(21, 0.05, 3.0);
  auto ra = fmm_solve<double>(a);
  auto rb = fmm_solve<double>(b);
  for (std::size_t i = 0; i < ra.field.T.size(); ++i)
    CHECK(rb.field.T[i] == doctest::Approx(3.0 * ra.field.T[i]).epsilon(1e-12));
}

TEST_CASE("arrival approximates the Euclidean distance") {
  Scenario s = uniform_scenario(81, 1.0 / 80.0);
  auto r = fmm_solve<double>(s);
  const auto& g = s.grid.geom;
  const double cx = g.x_at(s.start_ix), cy = g.y_at(s.start_iy);
  for (int iy = 0; iy < g.ny; iy += 7)
    for (int ix = 0; ix < g.nx; ix += 7) {
      double d = std::hypot(g.x_at(ix) - cx, g.y_at(iy) - cy);
      double t = r.field.T[g.index(ix, iy)];
      CHECK(t >= d - 1e-12);           // FMM never undershoots free space
      if (d > 0.2) CHECK(t <= d * 1.08);  // diagonal overshoot stays bounded
    }
}

TEST_CASE("early exit stops at the goal") {
  Scenario s = uniform_scenario(51, 0.02);
  s.goal_ix = s.start_ix + 3;
  s.goal_iy = s.start_iy;
  auto r = fmm_solve<double>(s, /*early_exit=*/true);
  CHECK(r.goal_reached);
  CHECK(r.accepted_sequence.size() < s.grid.geom.node_count());
  CHECK(r.field.T[s.grid.geom.index(s.goal_ix, s.goal_iy)] ==
        doctest::Approx(0.06).epsilon(1e-12));
}

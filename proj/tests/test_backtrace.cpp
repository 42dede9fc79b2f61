#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fmmlab/backtrace.hpp"
#include "fmmlab/fmm.hpp"

using namespace fmmlab;

namespace {

// A fully accepted field with T = f(x, y).
template <class F>
ArrivalField<double> analytic_field(const GridGeometry& g, F f) {
  ArrivalField<double> field;
  field.geom = g;
  field.T.resize(g.node_count());
  field.state.assign(g.node_count(), NodeState::Accepted);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ix++)
      field.T[g.index(ix, iy)] = f(g.x_at(ix), g.y_at(iy));
  return field;
}

Scenario uniform_scenario(int n) {
  Scenario s;
  s.name = "uniform-test";
  s.grid.geom = {n, n, 0.0, 0.0, 1.0 / (n - 1), 1.0 / (n - 1)};
  s.grid.tau.assign(static_cast<std::size_t>(n) * n, 1.0);
  s.start_ix = 0;
  s.start_iy = 0;
  s.goal_ix = n - 1;
  s.goal_iy = n - 1;
  return s;
}

}  // namespace

TEST_CASE("candidate segment counts per position class") {
  GridGeometry g{5, 5, 0.0, 0.0, 1.0, 1.0};
  CHECK(candidate_segments(2.0, 2.0, g).size() == 8);  // interior node
  CHECK(candidate_segments(0.0, 0.0, g).size() == 3);  // corner node
  CHECK(candidate_segments(4.0, 4.0, g).size() == 3);
  CHECK(candidate_segments(0.0, 2.0, g).size() == 4);  // boundary edge node
  CHECK(candidate_segments(2.0, 0.0, g).size() == 4);
  CHECK(candidate_segments(2.0, 2.5, g).size() == 6);  // on a vertical edge
  CHECK(candidate_segments(1.5, 2.0, g).size() == 6);  // on a horizontal edge
  CHECK(candidate_segments(1.5, 2.5, g).size() == 4);  // strict cell interior
  CHECK(candidate_segments(0.0, 1.5, g).size() == 3);  // boundary edge itself
}

TEST_CASE("no candidate segment passes through the query point") {
  GridGeometry g{5, 5, 0.0, 0.0, 1.0, 1.0};
  for (auto [px, py] : {std::pair{2.0, 2.0}, {0.0, 2.0}, {2.0, 4.0},
                        {0.0, 0.0}, {1.5, 2.0}, {1.5, 2.5}}) {
    for (const Segment& s : candidate_segments(px, py, g)) {
      double vx = s.bx - s.ax, vy = s.by - s.ay;
      double len2 = vx * vx + vy * vy;
      double t = ((px - s.ax) * vx + (py - s.ay) * vy) / len2;
      t = std::clamp(t, 0.0, 1.0);
      double dist = std::hypot(s.ax + t * vx - px, s.ay + t * vy - py);
      CHECK(dist > 1e-9);
    }
  }
}

TEST_CASE("steepest descent on a planar wave") {
  GridGeometry g{7, 7, 0.0, 0.0, 1.0, 1.0};
  auto field = analytic_field(g, [](double x, double) { return x; });
  PointT<double> p{3.0, 3.0};
  auto segs = candidate_segments(3.0, 3.0, g);
  PointT<double> q = steepest_point(field, p, segs);
  // Best descent is straight toward -x with phi = -1.
  CHECK(q.x == doctest::Approx(2.0));
  CHECK(q.y == doctest::Approx(3.0).epsilon(1e-9));

  auto flat = analytic_field(g, [](double, double) { return 1.0; });
  try {
    steepest_point(flat, p, segs);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.name() == "stagnation");
  }
}

TEST_CASE("extract_path reaches the source with decreasing T") {
  Scenario s = uniform_scenario(41);
  auto r = fmm_solve<double>(s);
  auto path = extract_path<double>(r.field, s);
  auto pts = path.approx_points();
  REQUIRE(pts.size() >= 2);
  // Starts at B, ends within the stop radius of A.
  CHECK(pts.front().first == s.grid.geom.x_at(s.goal_ix));
  CHECK(pts.front().second == s.grid.geom.y_at(s.goal_iy));
  double ex = pts.back().first - s.grid.geom.x_at(s.start_ix);
  double ey = pts.back().second - s.grid.geom.y_at(s.start_iy);
  CHECK(std::hypot(ex, ey) <= std::max(s.grid.geom.dx, s.grid.geom.dy));
  for (std::size_t i = 2; i < pts.size(); ++i) {
    double t_prev = interp_T<double>(r.field, pts[i - 1].first, pts[i - 1].second);
    double t_cur = interp_T<double>(r.field, pts[i].first, pts[i].second);
    CHECK(t_cur < t_prev);
  }
  // Diagonal route in free space: close to the straight line.
  double len = path.geometric_length();
  CHECK(len >= std::sqrt(2.0) - 1e-9);
  CHECK(len <= 1.05 * std::sqrt(2.0));
}

TEST_CASE("path cost is a trapezoidal line integral") {
  Scenario s = uniform_scenario(21);
  for (double& t : s.grid.tau) t = 2.0;
  auto r = fmm_solve<double>(s);
  auto path = extract_path<double>(r.field, s);
  double cost = path_cost<double>(path, s.grid);
  CHECK(cost == doctest::Approx(2.0 * path.geometric_length()).epsilon(1e-12));

  PathT<double> two;
  two.points.push_back({0.0, 0.0});
  two.points.push_back({0.3, 0.4});
  CHECK(path_cost<double>(two, s.grid) == doctest::Approx(2.0 * 0.5));
}

TEST_CASE("unreachable goal is reported") {
  Scenario s = uniform_scenario(5);
  auto r = fmm_solve<double>(s);
  r.field.T[s.grid.geom.index(s.goal_ix, s.goal_iy)] =
      std::numeric_limits<double>::infinity();
  try {
    extract_path<double>(r.field, s);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.name() == "goal-unreachable");
  }
}

TEST_CASE("path serializes as x,y CSV") {
  PathT<double> p;
  p.points.push_back({0.25, 0.5});
  p.points.push_back({0.0, 0.0});
  CHECK(path_to_csv(p) == "x,y\n0.25,0.5\n0,0\n");
}

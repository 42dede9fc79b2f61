#pragma once

// Backward propagation: pseudo-gradient descent on the arrival field from
// the goal back to the source, over segments around the current point, and
// the trapezoidal cumulative-cost integral of the extracted path.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fmmlab/interp.hpp"

namespace fmmlab {

template <class S>
struct PointT {
  S x, y;
};

template <class S>
struct PathT {
  std::vector<PointT<S>> points;  // from B to A

  int point_count() const { return static_cast<int>(points.size()); }
  std::vector<std::pair<double, double>> approx_points() const {
    std::vector<std::pair<double, double>> r;
    r.reserve(points.size());
    for (const auto& p : points)
      r.emplace_back(scalar_ops<S>::approx(p.x), scalar_ops<S>::approx(p.y));
    return r;
  }
  double geometric_length() const {
    auto pts = approx_points();
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      len += std::hypot(pts[i].first - pts[i - 1].first,
                        pts[i].second - pts[i - 1].second);
    return len;
  }
};

// A straight segment between two grid nodes (endpoint coordinates are
// exact inputs).
struct Segment {
  double ax, ay, bx, by;
};

// Segments around a point, per its position class:
//  - at a node: the ring through the in-bounds surrounding nodes
//    (consecutive survivors connected cyclically; 8 in the interior,
//    fewer near the domain boundary),
//  - on a grid edge: the boundary edges of the cells sharing that edge,
//    excluding the edge itself,
//  - strictly inside a cell: the cell's four boundary edges.
inline std::vector<Segment> candidate_segments(double px, double py,
                                               const GridGeometry& g) {
  const double tol = 1e-9 * std::min(g.dx, g.dy);
  const double fx = (px - g.x_min) / g.dx;
  const double fy = (py - g.y_min) / g.dy;
  const int rx = static_cast<int>(std::lround(fx));
  const int ry = static_cast<int>(std::lround(fy));
  const bool on_x = rx >= 0 && rx < g.nx && std::fabs(px - g.x_at(rx)) <= tol;
  const bool on_y = ry >= 0 && ry < g.ny && std::fabs(py - g.y_at(ry)) <= tol;

  auto node_seg = [&](int ix0, int iy0, int ix1, int iy1) {
    return Segment{g.x_at(ix0), g.y_at(iy0), g.x_at(ix1), g.y_at(iy1)};
  };
  std::vector<Segment> segs;

  if (on_x && on_y) {
    // Ring through the surrounding nodes, cyclic order.
    static constexpr int ring[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                                       {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    std::vector<std::pair<int, int>> nodes;
    for (const auto& d : ring) {
      int ix = rx + d[0], iy = ry + d[1];
      if (g.contains_node(ix, iy)) nodes.emplace_back(ix, iy);
    }
    for (std::size_t i = 0; i < nodes.size() && nodes.size() >= 2; ++i) {
      auto [ax, ay] = nodes[i];
      auto [bx, by] = nodes[(i + 1) % nodes.size()];
      if (nodes.size() == 2 && i == 1) break;  // avoid a duplicate segment
      // Opposite ring neighbors are collinear with the center node; the
      // chord would pass through P itself, so drop it.
      if (ax + bx == 2 * rx && ay + by == 2 * ry) continue;
      segs.push_back(node_seg(ax, ay, bx, by));
    }
    return segs;
  }

  auto cell_edges = [&](int cx, int cy, bool skip_vertical_at,
                        int skip_x, bool skip_horizontal_at, int skip_y) {
    if (cx < 0 || cy < 0 || cx > g.nx - 2 || cy > g.ny - 2) return;
    // bottom, top, left, right
    if (!(skip_horizontal_at && cy == skip_y))
      segs.push_back(node_seg(cx, cy, cx + 1, cy));
    if (!(skip_horizontal_at && cy + 1 == skip_y))
      segs.push_back(node_seg(cx, cy + 1, cx + 1, cy + 1));
    if (!(skip_vertical_at && cx == skip_x))
      segs.push_back(node_seg(cx, cy, cx, cy + 1));
    if (!(skip_vertical_at && cx + 1 == skip_x))
      segs.push_back(node_seg(cx + 1, cy, cx + 1, cy + 1));
  };

  if (on_x) {
    // P on the vertical grid line x = x_at(rx), between rows cy and cy+1.
    int cy = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
    cell_edges(rx - 1, cy, true, rx, false, 0);
    cell_edges(rx, cy, true, rx, false, 0);
    return segs;
  }
  if (on_y) {
    int cx = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
    cell_edges(cx, ry - 1, false, 0, true, ry);
    cell_edges(cx, ry, false, 0, true, ry);
    return segs;
  }

  int cx = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  int cy = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  cell_edges(cx, cy, false, 0, false, 0);
  return segs;
}

namespace detail {

template <class S>
struct PhiSample {
  S phi;
  PointT<S> q;
};

// phi at parameter t of a segment: (T(Q) - T(P)) / |Q - P|.
template <class S>
PhiSample<S> eval_phi(const ArrivalField<S>& field, const PointT<S>& p,
                      const S& t_p, const Segment& seg, double t) {
  using Ops = scalar_ops<S>;
  PointT<S> q;
  q.x = Ops::add(Ops::from(seg.ax),
                 Ops::mul(Ops::from(seg.bx - seg.ax), Ops::from(t)));
  q.y = Ops::add(Ops::from(seg.ay),
                 Ops::mul(Ops::from(seg.by - seg.ay), Ops::from(t)));
  const S dx = Ops::sub(q.x, p.x);
  const S dy = Ops::sub(q.y, p.y);
  const S dist = Ops::sqrt(Ops::add(Ops::mul(dx, dx), Ops::mul(dy, dy)));
  const S t_q = interp_T(field, q.x, q.y);
  PhiSample<S> s;
  s.phi = Ops::div(Ops::sub(t_q, t_p), dist);
  s.q = std::move(q);
  return s;
}

}  // namespace detail

// The next point of the path: global minimizer of phi over all candidate
// segments, by 65 uniform samples per segment followed by golden-section
// refinement. Ties go to the first segment in enumeration order.
template <class S>
PointT<S> steepest_point(const ArrivalField<S>& field, const PointT<S>& p,
                         const std::vector<Segment>& segments) {
  using Ops = scalar_ops<S>;
  if (segments.empty()) throw Error("stagnation", "no candidate segments");
  const S t_p = interp_T(field, p.x, p.y);

  std::optional<detail::PhiSample<S>> best;

  for (const Segment& seg : segments) {
    constexpr int kSamples = 65;
    int best_k = 0;
    detail::PhiSample<S> seg_best = detail::eval_phi(field, p, t_p, seg, 0.0);
    for (int k = 1; k < kSamples; ++k) {
      double t = static_cast<double>(k) / (kSamples - 1);
      auto s = detail::eval_phi(field, p, t_p, seg, t);
      if (Ops::less(s.phi, seg_best.phi, sites::bt_phi_less)) {
        seg_best = std::move(s);
        best_k = k;
      }
    }
    // Golden-section refinement around the best sample.
    double lo = std::max(0.0, (best_k - 1) / 64.0);
    double hi = std::min(1.0, (best_k + 1) / 64.0);
    constexpr double kInvPhi = 0.6180339887498949;
    double t1 = hi - kInvPhi * (hi - lo);
    double t2 = lo + kInvPhi * (hi - lo);
    auto s1 = detail::eval_phi(field, p, t_p, seg, t1);
    auto s2 = detail::eval_phi(field, p, t_p, seg, t2);
    while (hi - lo > 1e-12 * std::max(1.0, std::fabs(hi))) {
      if (Ops::less(s1.phi, s2.phi, sites::bt_phi_less)) {
        hi = t2;
        t2 = t1;
        s2 = std::move(s1);
        t1 = hi - kInvPhi * (hi - lo);
        s1 = detail::eval_phi(field, p, t_p, seg, t1);
      } else {
        lo = t1;
        t1 = t2;
        s1 = std::move(s2);
        t2 = lo + kInvPhi * (hi - lo);
        s2 = detail::eval_phi(field, p, t_p, seg, t2);
      }
    }
    const auto& refined =
        Ops::less(s1.phi, s2.phi, sites::bt_phi_less) ? s1 : s2;
    if (Ops::less(refined.phi, seg_best.phi, sites::bt_phi_less))
      seg_best = refined;

    if (!best || Ops::less(seg_best.phi, best->phi, sites::bt_phi_less))
      best = std::move(seg_best);
  }

  if (!Ops::less(best->phi, Ops::from(0.0), sites::bt_descent))
    throw Error("stagnation", "no descent direction");
  return best->q;
}

template <class S>
PathT<S> extract_path(const ArrivalField<S>& field, const Scenario& scenario) {
  using Ops = scalar_ops<S>;
  const auto& g = field.geom;
  const double ax = g.x_at(scenario.start_ix), ay = g.y_at(scenario.start_iy);
  const double stop_radius = std::max(g.dx, g.dy);
  const int budget = 10 * (g.nx + g.ny);

  if (Ops::is_infinite(field.T[g.index(scenario.goal_ix, scenario.goal_iy)]))
    throw Error("goal-unreachable", "goal has no finite arrival time");

  PathT<S> path;
  PointT<S> p{Ops::from(g.x_at(scenario.goal_ix)),
              Ops::from(g.y_at(scenario.goal_iy))};
  S t_prev = interp_T(field, p.x, p.y);
  path.points.push_back(p);

  for (int step = 0; step < budget; ++step) {
    // Stop once inside one grid spacing of A, then append A itself.
    const S ddx = Ops::sub(p.x, Ops::from(ax));
    const S ddy = Ops::sub(p.y, Ops::from(ay));
    const S dist2 = Ops::add(Ops::mul(ddx, ddx), Ops::mul(ddy, ddy));
    if (Ops::less_equal(dist2, Ops::from(stop_radius * stop_radius),
                        sites::bt_stop_radius)) {
      // Append A unless the descent already landed exactly on it.
      if (Ops::approx(dist2) != 0.0)
        path.points.push_back({Ops::from(ax), Ops::from(ay)});
      return path;
    }

    auto segs =
        candidate_segments(Ops::approx(p.x), Ops::approx(p.y), g);
    PointT<S> q = steepest_point(field, p, segs);
    S t_q = interp_T(field, q.x, q.y);
    if (!Ops::less(t_q, t_prev, sites::bt_t_decrease))
      throw Error("backtrace-diverged", "arrival time failed to decrease");
    t_prev = std::move(t_q);
    p = std::move(q);
    path.points.push_back(p);
  }
  throw Error("backtrace-diverged", "step budget exceeded");
}

// Trapezoidal line integral of tau along the path.
template <class S>
S path_cost(const PathT<S>& path, const CostGrid& grid) {
  using Ops = scalar_ops<S>;
  S cost = Ops::from(0.0);
  if (path.points.size() < 2) return cost;
  S tau_prev = tau_at_s<S>(grid, path.points[0].x, path.points[0].y);
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const auto& a = path.points[i - 1];
    const auto& b = path.points[i];
    S tau_b = tau_at_s<S>(grid, b.x, b.y);
    const S dx = Ops::sub(b.x, a.x);
    const S dy = Ops::sub(b.y, a.y);
    const S len = Ops::sqrt(Ops::add(Ops::mul(dx, dx), Ops::mul(dy, dy)));
    const S avg = Ops::div(Ops::add(tau_prev, tau_b), Ops::from(2.0));
    cost = Ops::add(cost, Ops::mul(avg, len));
    tau_prev = std::move(tau_b);
  }
  return cost;
}

// CSV export: header `x,y`, one point per line, shortest round-trip
// decimals.
template <class S>
std::string path_to_csv(const PathT<S>& path) {
  std::string out = "x,y\n";
  for (const auto& [x, y] : path.approx_points())
    out += format_double(x) + "," + format_double(y) + "\n";
  return out;
}

}  // namespace fmmlab

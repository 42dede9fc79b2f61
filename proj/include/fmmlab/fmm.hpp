#pragma once

// Forward wave-front propagation: first-order isotropic upwind scheme on a
// Cartesian grid, Dijkstra-style acceptance order, lazy-deletion binary
// heap. Generic over the scalar mode; every arithmetic operation and
// comparison goes through scalar_ops<S>.

#include <cstdint>
#include <vector>

#include "fmmlab/grid.hpp"
#include "fmmlab/scalar.hpp"
#include "fmmlab/site.hpp"

namespace fmmlab {

enum class NodeState : std::uint8_t { Far, NarrowBand, Accepted };

template <class S>
struct ArrivalField {
  GridGeometry geom;
  std::vector<S> T;
  std::vector<NodeState> state;
};

template <class S>
struct SolveResult {
  ArrivalField<S> field;
  std::vector<double> accepted_sequence;  // finalized T values, in order
  std::size_t heap_pushes = 0;
  bool goal_reached = false;
};

namespace detail {

template <class S>
struct HeapEntry {
  S key;
  std::size_t node;
  std::uint64_t stamp;
  int ix, iy;
};

// Binary min-heap with the scalar's comparison; equal keys ordered by
// (iy, ix) ascending for bit-reproducible runs.
template <class S>
class NarrowBandQueue {
  using Ops = scalar_ops<S>;

 public:
  bool empty() const { return heap_.empty(); }
  std::size_t push_count() const { return pushes_; }

  void push(HeapEntry<S> e) {
    ++pushes_;
    heap_.push_back(std::move(e));
    std::size_t i = heap_.size() - 1;
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!before(heap_[i], heap_[parent])) break;
      std::swap(heap_[i], heap_[parent]);
      i = parent;
    }
  }

  HeapEntry<S> pop() {
    HeapEntry<S> top = std::move(heap_.front());
    heap_.front() = std::move(heap_.back());
    heap_.pop_back();
    std::size_t i = 0;
    while (true) {
      std::size_t l = 2 * i + 1, r = 2 * i + 2, m = i;
      if (l < heap_.size() && before(heap_[l], heap_[m])) m = l;
      if (r < heap_.size() && before(heap_[r], heap_[m])) m = r;
      if (m == i) break;
      std::swap(heap_[i], heap_[m]);
      i = m;
    }
    return top;
  }

 private:
  bool before(const HeapEntry<S>& a, const HeapEntry<S>& b) const {
    if (Ops::less(a.key, b.key, sites::fmm_heap_less)) return true;
    if (Ops::less(b.key, a.key, sites::fmm_heap_less)) return false;
    if (a.iy != b.iy) return a.iy < b.iy;
    return a.ix < b.ix;
  }

  std::vector<HeapEntry<S>> heap_;
  std::size_t pushes_ = 0;
};

}  // namespace detail

// Candidate arrival time at a node from one quadrant: horizontal neighbor
// value T_h at spacing dx, vertical T_v at spacing dy, local cost tau.
// Two-sided solve of ((T-T_h)/dx)^2 + ((T-T_v)/dy)^2 = tau^2 when the
// larger root is upwind-valid, otherwise the better one-sided candidate.
template <class S>
S quadrant_update(const S& T_h, const S& T_v, double dx, double dy,
                  const S& tau) {
  using Ops = scalar_ops<S>;
  const bool h_inf = Ops::is_infinite(T_h);
  const bool v_inf = Ops::is_infinite(T_v);
  if (h_inf && v_inf) throw Error("no-valued-neighbor", "both inputs infinite");

  auto one_sided = [&](const S& t, double spacing) {
    return Ops::add(t, Ops::mul(tau, Ops::from(spacing)));
  };
  if (h_inf) return one_sided(T_v, dy);
  if (v_inf) return one_sided(T_h, dx);

  const S inv_dx2 = Ops::from(1.0 / (dx * dx));
  const S inv_dy2 = Ops::from(1.0 / (dy * dy));
  const S a = Ops::add(inv_dx2, inv_dy2);
  const S b = Ops::neg(Ops::mul(Ops::from(2.0),
                                Ops::add(Ops::mul(T_h, inv_dx2),
                                         Ops::mul(T_v, inv_dy2))));
  const S c = Ops::sub(Ops::add(Ops::mul(Ops::mul(T_h, T_h), inv_dx2),
                                Ops::mul(Ops::mul(T_v, T_v), inv_dy2)),
                       Ops::mul(tau, tau));
  const S disc = Ops::sub(Ops::mul(b, b),
                          Ops::mul(Ops::mul(Ops::from(4.0), a), c));
  const S zero = Ops::from(0.0);

  const S os_h = one_sided(T_h, dx);
  const S os_v = one_sided(T_v, dy);
  const S& best_one_sided =
      Ops::less(os_h, os_v, sites::fmm_quadrant_min) ? os_h : os_v;
  if (Ops::less(disc, zero, sites::fmm_discriminant)) return best_one_sided;

  const S root = Ops::div(Ops::add(Ops::neg(b), Ops::sqrt(disc)),
                          Ops::mul(Ops::from(2.0), a));
  const S lower = Ops::less(T_h, T_v, sites::fmm_upwind) ? T_v : T_h;
  if (Ops::less(root, lower, sites::fmm_upwind)) return best_one_sided;
  return root;
}

template <class S>
SolveResult<S> fmm_solve(const Scenario& scenario, bool early_exit = false) {
  using Ops = scalar_ops<S>;
  scenario.validate();
  const auto& g = scenario.grid.geom;

  SolveResult<S> result;
  result.field.geom = g;
  result.field.T.assign(g.node_count(), Ops::infinity());
  result.field.state.assign(g.node_count(), NodeState::Far);

  std::vector<std::uint64_t> stamp(g.node_count(), 0);
  std::uint64_t next_stamp = 1;
  detail::NarrowBandQueue<S> queue;

  auto push_node = [&](int ix, int iy, const S& key) {
    std::size_t n = g.index(ix, iy);
    stamp[n] = next_stamp++;
    queue.push({key, n, stamp[n], ix, iy});
  };

  const std::size_t start = g.index(scenario.start_ix, scenario.start_iy);
  const std::size_t goal = g.index(scenario.goal_ix, scenario.goal_iy);
  result.field.T[start] = Ops::from(0.0);
  result.field.state[start] = NodeState::NarrowBand;
  push_node(scenario.start_ix, scenario.start_iy, result.field.T[start]);

  auto neighbor_T = [&](int ix, int iy) -> const S& {
    static const S inf = Ops::infinity();
    if (!g.contains_node(ix, iy)) return inf;
    return result.field.T[g.index(ix, iy)];
  };

  auto update_node = [&](int ix, int iy) {
    if (!g.contains_node(ix, iy)) return;
    std::size_t n = g.index(ix, iy);
    if (result.field.state[n] == NodeState::Accepted) return;
    const S& west = neighbor_T(ix - 1, iy);
    const S& east = neighbor_T(ix + 1, iy);
    const S& south = neighbor_T(ix, iy - 1);
    const S& north = neighbor_T(ix, iy + 1);
    const S tau = Ops::from(scenario.grid.at(ix, iy));

    bool have = false;
    S best = Ops::infinity();
    for (const S* h : {&west, &east})
      for (const S* v : {&south, &north}) {
        if (Ops::is_infinite(*h) && Ops::is_infinite(*v)) continue;
        S cand = quadrant_update(*h, *v, g.dx, g.dy, tau);
        if (!have || Ops::less(cand, best, sites::fmm_quadrant_min)) {
          best = std::move(cand);
          have = true;
        }
      }
    if (!have) return;
    if (Ops::less(best, result.field.T[n], sites::fmm_improve)) {
      result.field.T[n] = best;
      result.field.state[n] = NodeState::NarrowBand;
      push_node(ix, iy, best);
    }
  };

  while (!queue.empty()) {
    detail::HeapEntry<S> e = queue.pop();
    if (stamp[e.node] != e.stamp ||
        result.field.state[e.node] == NodeState::Accepted)
      continue;  // lazy deletion
    result.field.state[e.node] = NodeState::Accepted;
    result.accepted_sequence.push_back(Ops::approx(result.field.T[e.node]));
    if (e.node == goal) {
      result.goal_reached = true;
      if (early_exit) break;
    }
    update_node(e.ix - 1, e.iy);
    update_node(e.ix + 1, e.iy);
    update_node(e.ix, e.iy - 1);
    update_node(e.ix, e.iy + 1);
  }
  result.heap_pushes = queue.push_count();
  if (early_exit && !result.goal_reached)
    throw Error("goal-unreachable", "queue exhausted before the goal");
  return result;
}

}  // namespace fmmlab

#pragma once

// Scalar-generic cell location and bilinear interpolation. The float->int
// conversion of the cell index is the classic instability of this kind of
// code: a coordinate landing exactly on a grid line divides to a value
// whose ideal and float truncations can disagree.

#include <algorithm>

#include "fmmlab/fmm.hpp"
#include "fmmlab/grid.hpp"

namespace fmmlab {

template <class S>
struct CellPos {
  int ix, iy;  // lower-left node of the enclosing cell
  S u, v;      // fractional offsets in [0, 1]
};

namespace detail {

template <class S>
long cell_axis_index(const S& offset_over_spacing, int max_cell,
                     const Site& site) {
  using Ops = scalar_ops<S>;
  double a = Ops::approx(offset_over_spacing);
  if (a < 0.0) {
    if (a < -1e-9) throw Error("out-of-domain", "point outside the grid box");
    return 0;
  }
  long i = Ops::trunc_index(offset_over_spacing, site);
  return std::min(i, static_cast<long>(max_cell));
}

}  // namespace detail

template <class S>
CellPos<S> locate_cell(const GridGeometry& g, const S& x, const S& y) {
  using Ops = scalar_ops<S>;
  const double eps_x = 1e-9 * g.dx, eps_y = 1e-9 * g.dy;
  const double ax = Ops::approx(x), ay = Ops::approx(y);
  if (ax < g.x_min - eps_x || ax > g.x_max() + eps_x || ay < g.y_min - eps_y ||
      ay > g.y_max() + eps_y)
    throw Error("out-of-domain", "point outside the grid box");

  const S fx = Ops::div(Ops::sub(x, Ops::from(g.x_min)), Ops::from(g.dx));
  const S fy = Ops::div(Ops::sub(y, Ops::from(g.y_min)), Ops::from(g.dy));
  CellPos<S> pos;
  pos.ix = static_cast<int>(
      detail::cell_axis_index(fx, g.nx - 2, sites::grid_index_x));
  pos.iy = static_cast<int>(
      detail::cell_axis_index(fy, g.ny - 2, sites::grid_index_y));
  pos.u = Ops::sub(fx, Ops::from(static_cast<double>(pos.ix)));
  pos.v = Ops::sub(fy, Ops::from(static_cast<double>(pos.iy)));
  return pos;
}

// Bilinear combination of the four corner values of a cell.
template <class S, class Corner>
S bilinear(const CellPos<S>& pos, Corner corner) {
  using Ops = scalar_ops<S>;
  const S one = Ops::from(1.0);
  const S cu = Ops::sub(one, pos.u);
  const S cv = Ops::sub(one, pos.v);
  S r = Ops::mul(Ops::mul(cu, cv), corner(pos.ix, pos.iy));
  r = Ops::add(r, Ops::mul(Ops::mul(pos.u, cv), corner(pos.ix + 1, pos.iy)));
  r = Ops::add(r, Ops::mul(Ops::mul(cu, pos.v), corner(pos.ix, pos.iy + 1)));
  r = Ops::add(r,
               Ops::mul(Ops::mul(pos.u, pos.v), corner(pos.ix + 1, pos.iy + 1)));
  return r;
}

// Bilinear tau in the scalar mode (node samples are exact constants).
template <class S>
S tau_at_s(const CostGrid& grid, const S& x, const S& y) {
  using Ops = scalar_ops<S>;
  CellPos<S> pos = locate_cell<S>(grid.geom, x, y);
  return bilinear<S>(pos, [&](int ix, int iy) {
    return Ops::from(grid.at(ix, iy));
  });
}

// Bilinear arrival time; all four enclosing nodes must be Accepted.
template <class S>
S interp_T(const ArrivalField<S>& field, const S& x, const S& y) {
  CellPos<S> pos = locate_cell<S>(field.geom, x, y);
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx)
      if (field.state[field.geom.index(pos.ix + dx, pos.iy + dy)] !=
          NodeState::Accepted)
        throw Error("unaccepted-region", "enclosing node not accepted");
  return bilinear<S>(pos, [&](int ix, int iy) -> const S& {
    return field.T[field.geom.index(ix, iy)];
  });
}

}  // namespace fmmlab

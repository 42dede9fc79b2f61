#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fmmlab/error.hpp"

namespace fmmlab {

struct GridGeometry {
  int nx = 2, ny = 2;
  double x_min = 0.0, y_min = 0.0;
  double dx = 1.0, dy = 1.0;

  void validate() const;
  double x_at(int ix) const { return x_min + ix * dx; }
  double y_at(int iy) const { return y_min + iy * dy; }
  double x_max() const { return x_at(nx - 1); }
  double y_max() const { return y_at(ny - 1); }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx + ix;
  }
  bool contains_node(int ix, int iy) const {
    return ix >= 0 && ix < nx && iy >= 0 && iy < ny;
  }
};

// Cost density tau sampled at the nodes, row-major, row 0 at y_min.
struct CostGrid {
  GridGeometry geom;
  std::vector<double> tau;

  double at(int ix, int iy) const { return tau[geom.index(ix, iy)]; }
  void validate() const;
};

struct Scenario {
  CostGrid grid;
  int start_ix = 0, start_iy = 0;  // point A
  int goal_ix = 0, goal_iy = 0;    // point B
  std::string name = "unnamed";

  void validate() const;
};

// Scenario text format v1 (see README): header line, name, nx ny,
// x_min y_min dx dy, start, goal, then ny rows of nx tau values.
Scenario load_scenario(const std::string& text);
std::string write_scenario(const Scenario& s);

Scenario load_scenario_file(const std::string& path);
void write_scenario_file(const Scenario& s, const std::string& path);

enum class Preset { uniform, obstacles, turbulence, paper_like };

struct GenParams {
  int nx = 101, ny = 101;
  double x_min = 0.0, y_min = 0.0;
  double dx = 0.01, dy = 0.01;
  double tau = 1.0;      // base cost
  int blob_count = 3;    // turbulence blobs / obstacle rectangles
  double obstacle_cost_factor = 25.0;
};

Scenario generate_scenario(Preset preset, const GenParams& params,
                           std::uint64_t seed);

Preset parse_preset(const std::string& name);

// Bilinear interpolation of tau at a continuous point.
double tau_at(const CostGrid& grid, double x, double y);

// Binary PGM (P5), min->0 max->255 affinely; +inf renders as 255.
std::string field_to_pgm(const GridGeometry& geom,
                         const std::vector<double>& values);

// Shortest round-trip decimal formatting used by all text outputs.
std::string format_double(double v);

}  // namespace fmmlab

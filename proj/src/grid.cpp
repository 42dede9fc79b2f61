#include "fmmlab/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fmmlab/rng.hpp"

namespace fmmlab {

void GridGeometry::validate() const {
  if (nx < 2 || ny < 2)
    throw Error("invalid-geometry", "need at least 2 nodes per axis");
  if (!(dx > 0.0) || !(dy > 0.0))
    throw Error("invalid-geometry", "spacings must be positive");
  if (!std::isfinite(x_min) || !std::isfinite(y_min))
    throw Error("invalid-geometry", "non-finite origin");
}

void CostGrid::validate() const {
  geom.validate();
  if (tau.size() != geom.node_count())
    throw Error("invalid-cost", "tau size does not match geometry");
  for (double t : tau)
    if (!(t > 0.0) || !std::isfinite(t))
      throw Error("invalid-cost", "tau values must be finite and > 0");
}

void Scenario::validate() const {
  grid.validate();
  const auto& g = grid.geom;
  if (!g.contains_node(start_ix, start_iy) || !g.contains_node(goal_ix, goal_iy))
    throw Error("invalid-endpoint", "start/goal outside the grid");
  if (start_ix == goal_ix && start_iy == goal_iy)
    throw Error("invalid-endpoint", "start equals goal");
}

std::string format_double(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

namespace {

// Whitespace-separated tokens; '#' starts a comment to end of line.
std::vector<std::string> tokenize(const std::string& text,
                                  std::vector<int>* lines) {
  std::vector<std::string> tokens;
  int line = 1;
  std::string cur;
  bool comment = false;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      if (lines) lines->push_back(line);
      cur.clear();
    }
  };
  for (char c : text) {
    if (c == '\n') {
      flush();
      comment = false;
      ++line;
    } else if (comment) {
      // skip
    } else if (c == '#') {
      flush();
      comment = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return tokens;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error("parse-error(line " + std::to_string(line) + ")", what);
}

double parse_double(const std::string& tok, int line) {
  double v;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
    parse_fail(line, "bad number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, int line) {
  int v;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
    parse_fail(line, "bad integer '" + tok + "'");
  return v;
}

}  // namespace

Scenario load_scenario(const std::string& text) {
  // The name line is free-form, so split it off before tokenizing.
  std::istringstream in(text);
  std::string header, name;
  if (!std::getline(in, header)) parse_fail(1, "empty input");
  {
    std::istringstream h(header);
    std::string magic;
    int version = 0;
    h >> magic >> version;
    if (magic != "fmmlab-scenario" || version != 1)
      parse_fail(1, "expected 'fmmlab-scenario 1'");
  }
  if (!std::getline(in, name)) parse_fail(2, "missing name line");
  while (!name.empty() && (name.back() == '\r' || name.back() == ' '))
    name.pop_back();
  if (name.empty()) name = "unnamed";

  std::string rest((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::vector<int> lines;
  std::vector<std::string> tok = tokenize(rest, &lines);
  std::size_t k = 0;
  auto next = [&](const char* what) -> const std::string& {
    if (k >= tok.size())
      parse_fail(lines.empty() ? 3 : lines.back() + 2,
                 std::string("missing ") + what);
    return tok[k++];
  };
  auto line_of = [&](std::size_t i) { return lines[i] + 2; };
  auto next_int = [&](const char* what) {
    const std::string& t = next(what);
    return parse_int(t, line_of(k - 1));
  };
  auto next_dbl = [&](const char* what) {
    const std::string& t = next(what);
    return parse_double(t, line_of(k - 1));
  };

  Scenario s;
  s.name = name;
  s.grid.geom.nx = next_int("nx");
  s.grid.geom.ny = next_int("ny");
  s.grid.geom.x_min = next_dbl("x_min");
  s.grid.geom.y_min = next_dbl("y_min");
  s.grid.geom.dx = next_dbl("dx");
  s.grid.geom.dy = next_dbl("dy");
  s.grid.geom.validate();
  s.start_ix = next_int("start_ix");
  s.start_iy = next_int("start_iy");
  s.goal_ix = next_int("goal_ix");
  s.goal_iy = next_int("goal_iy");
  s.grid.tau.reserve(s.grid.geom.node_count());
  for (std::size_t i = 0; i < s.grid.geom.node_count(); ++i)
    s.grid.tau.push_back(next_dbl("tau value"));
  if (k != tok.size()) parse_fail(line_of(k), "trailing tokens");
  s.validate();
  return s;
}

std::string write_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "fmmlab-scenario 1\n";
  out << (s.name.empty() ? "unnamed" : s.name) << "\n";
  const auto& g = s.grid.geom;
  out << g.nx << " " << g.ny << "\n";
  out << format_double(g.x_min) << " " << format_double(g.y_min) << " "
      << format_double(g.dx) << " " << format_double(g.dy) << "\n";
  out << s.start_ix << " " << s.start_iy << "\n";
  out << s.goal_ix << " " << s.goal_iy << "\n";
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix) out << " ";
      out << format_double(s.grid.at(ix, iy));
    }
    out << "\n";
  }
  return out.str();
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return load_scenario(text);
}

void write_scenario_file(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-error", "cannot open " + path);
  out << write_scenario(s);
}

Preset parse_preset(const std::string& name) {
  if (name == "uniform") return Preset::uniform;
  if (name == "obstacles") return Preset::obstacles;
  if (name == "turbulence") return Preset::turbulence;
  if (name == "paper-like") return Preset::paper_like;
  throw Error("invalid-generator-params", "unknown preset '" + name + "'");
}

namespace {

struct Blob {
  double cx, cy, amplitude, sigma;
};

void add_blobs(CostGrid& grid, const std::vector<Blob>& blobs) {
  const auto& g = grid.geom;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      double x = g.x_at(ix), y = g.y_at(iy);
      double add = 0.0;
      for (const Blob& b : blobs) {
        double r2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
        add += b.amplitude * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
      }
      grid.tau[g.index(ix, iy)] += add;
    }
}

std::vector<Blob> random_blobs(const GridGeometry& g, int count, double base,
                               RngStream& rng) {
  std::vector<Blob> blobs;
  double w = g.x_max() - g.x_min, h = g.y_max() - g.y_min;
  for (int i = 0; i < count; ++i) {
    Blob b;
    b.cx = rng.next_uniform(g.x_min + 0.2 * w, g.x_min + 0.8 * w);
    b.cy = rng.next_uniform(g.y_min + 0.2 * h, g.y_min + 0.8 * h);
    b.amplitude = base * rng.next_uniform(5.0, 15.0);
    b.sigma = rng.next_uniform(0.05, 0.15) * std::max(w, h);
    blobs.push_back(b);
  }
  return blobs;
}

}  // namespace

Scenario generate_scenario(Preset preset, const GenParams& p,
                           std::uint64_t seed) {
  if (p.nx < 2 || p.ny < 2 || !(p.dx > 0) || !(p.dy > 0) || !(p.tau > 0) ||
      p.blob_count < 0)
    throw Error("invalid-generator-params", "out-of-range generator params");

  Scenario s;
  GridGeometry g{p.nx, p.ny, p.x_min, p.y_min, p.dx, p.dy};
  if (preset == Preset::paper_like) {
    g = GridGeometry{200, 200, 0.0, 0.0, 0.005, 0.005};
  }
  s.grid.geom = g;
  s.grid.tau.assign(g.node_count(), p.tau);
  s.start_ix = 0;
  s.start_iy = g.ny / 2;
  s.goal_ix = g.nx - 1;
  s.goal_iy = g.ny / 2;
  RngStream rng{seed};

  switch (preset) {
    case Preset::uniform:
      s.name = "uniform";
      break;
    case Preset::obstacles: {
      s.name = "obstacles";
      for (int i = 0; i < p.blob_count; ++i) {
        double w = g.x_max() - g.x_min, h = g.y_max() - g.y_min;
        double x0 = rng.next_uniform(g.x_min + 0.15 * w, g.x_min + 0.7 * w);
        double y0 = rng.next_uniform(g.y_min + 0.15 * h, g.y_min + 0.7 * h);
        double x1 = x0 + rng.next_uniform(0.05, 0.2) * w;
        double y1 = y0 + rng.next_uniform(0.05, 0.2) * h;
        for (int iy = 0; iy < g.ny; ++iy)
          for (int ix = 0; ix < g.nx; ++ix) {
            double x = g.x_at(ix), y = g.y_at(iy);
            if (x >= x0 && x <= x1 && y >= y0 && y <= y1)
              s.grid.tau[g.index(ix, iy)] = p.tau * p.obstacle_cost_factor;
          }
      }
      break;
    }
    case Preset::turbulence:
      s.name = "turbulence";
      add_blobs(s.grid, random_blobs(g, p.blob_count, p.tau, rng));
      break;
    case Preset::paper_like:
      // 200x200 nodes at 0.005 spacing; start on the left edge at y = 0.5,
      // goal on the right edge at y = 0.5; three turbulence blobs.
      s.name = "paper-like";
      s.start_ix = 0;
      s.start_iy = 100;
      s.goal_ix = g.nx - 1;
      s.goal_iy = 100;
      add_blobs(s.grid, random_blobs(g, 3, p.tau, rng));
      break;
  }
  s.validate();
  return s;
}

double tau_at(const CostGrid& grid, double x, double y) {
  const auto& g = grid.geom;
  const double eps_x = 1e-12 * g.dx, eps_y = 1e-12 * g.dy;
  if (x < g.x_min - eps_x || x > g.x_max() + eps_x || y < g.y_min - eps_y ||
      y > g.y_max() + eps_y)
    throw Error("out-of-domain", "point outside the grid box");
  double fx = (x - g.x_min) / g.dx;
  double fy = (y - g.y_min) / g.dy;
  int ix = std::clamp(static_cast<int>(fx), 0, g.nx - 2);
  int iy = std::clamp(static_cast<int>(fy), 0, g.ny - 2);
  double u = fx - ix, v = fy - iy;
  return (1 - u) * (1 - v) * grid.at(ix, iy) + u * (1 - v) * grid.at(ix + 1, iy) +
         (1 - u) * v * grid.at(ix, iy + 1) + u * v * grid.at(ix + 1, iy + 1);
}

std::string field_to_pgm(const GridGeometry& geom,
                         const std::vector<double>& values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isinf(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 0.0;
  }
  double span = hi - lo;
  std::string out = "P5\n" + std::to_string(geom.nx) + " " +
                    std::to_string(geom.ny) + "\n255\n";
  out.reserve(out.size() + values.size());
  for (double v : values) {
    unsigned char g;
    if (std::isinf(v))
      g = 255;
    else if (span == 0.0)
      g = 0;  // degenerate range: zero span maps to 0
    else
      g = static_cast<unsigned char>(
          std::lround((v - lo) / span * 255.0));
    out.push_back(static_cast<char>(g));
  }
  return out;
}

}  // namespace fmmlab

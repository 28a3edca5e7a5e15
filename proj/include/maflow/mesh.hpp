// Discretizations: the 1-D logarithmic grid for radially symmetric runs and
// the cut-cell square grid covering the unit disc for planar runs.
#pragma once

#include <vector>

namespace maflow {

// Uniform grid in s = log|z| on [s_min, 0]; the right end is the domain
// boundary |z| = 1.
struct RadialMesh {
  int n = 1;           // complex dimension
  double s_min = -9.0;
  double h = 0.0;
  std::vector<double> s;

  static RadialMesh make(int n, double s_min, int points);
  int points() const { return int(s.size()); }
};

// Square grid of (cells+1)^2 nodes on [-1,1]^2 masked to the unit disc.
// Interior nodes carry unknowns; arms crossing the circle are shortened to
// the crossing point (Shortley-Weller) where the Dirichlet value applies.
// Nodes closer than snap_fraction*h to the circle are pinned to the
// projected boundary value instead of carrying an unknown.
struct PlanarMesh {
  enum class NodeType : unsigned char { Exterior = 0, Interior = 1, Pinned = 2 };

  int cells = 128;
  double h = 0.0;
  std::vector<double> xs, ys;       // node coordinates, size cells+1
  std::vector<NodeType> type;       // row-major, size (cells+1)^2
  std::vector<float> thE, thW, thN, thS; // arm fractions in (0,1], interior nodes
  std::vector<int> interior;        // flat indices of interior nodes
  std::vector<int> unknown_of;      // flat index -> position in `interior`, or -1

  static constexpr double snap_fraction = 0.05;

  static PlanarMesh make_disc(int cells);
  int side() const { return cells + 1; }
  int idx(int i, int j) const { return j * side() + i; }
  double x_of(int flat) const { return xs[flat % side()]; }
  double y_of(int flat) const { return ys[flat / side()]; }
  bool inside(double x, double y) const { return x * x + y * y < 1.0; }
};

} // namespace maflow

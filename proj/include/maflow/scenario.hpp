// Scenario definition: the closed expression vocabulary for initial, boundary
// and source data, the problem statement loaded from TOML, and its canonical
// semantic hash.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maflow/core.hpp"

namespace maflow {

// Spatial vocabulary: c, c*|z|^2, c*log(offset + |z|^2). Closed under the
// unit-ball rescaling and carries exact radial derivatives.
struct SmoothTerm {
  enum class Kind { Constant, Quadratic, LogShift };
  Kind kind = Kind::Constant;
  double coef = 0.0;
  double offset = 1.0; // LogShift only; must be > 0

  double value_r2(double r2) const;  // value at |z|^2 = r2
  double d_r2(double r2) const;      // derivative w.r.t. r2
  double d2_r2(double r2) const;     // second derivative w.r.t. r2
};

struct SmoothPart {
  std::vector<SmoothTerm> terms;

  double value_r2(double r2) const;
  // Radial profile in s = log r and its s-derivatives.
  double value_s(double s) const;
  double d1_s(double s) const;
  double d2_s(double s) const;
};

// Polynomial in t, coefficients in increasing powers.
struct TimePoly {
  std::vector<double> coef;
  double value(double t) const;
  double d1(double t) const;
  bool is_zero() const;
};

// One source term: spatial expression times a polynomial in t.
struct SourceTerm {
  SmoothTerm space;
  TimePoly poly; // empty means identically 1
  double value(double r2, double t) const;
  double dt(double r2, double t) const;
};

struct SourceFn {
  std::vector<SourceTerm> terms;
  double value(double r2, double t) const;
  double dt(double r2, double t) const;
  bool is_zero() const;
};

enum class SolverKind { Auto, Radial, Planar };

struct MeshControls {
  SolverKind solver = SolverKind::Auto;
  int radial_points = 640;   // points of the 1-D grid in s
  int planar_cells = 128;    // cells per side of the square grid
  double radial_depth_margin = 0.3; // extra depth below the deepest plateau
};

struct LadderControls {
  int rungs = 8; // 0 = direct solve of the raw smooth data, no ladder
};

// Full problem statement.
struct FlowScenario {
  std::string name;
  FlowParams params;
  double domain_radius = 1.0;
  std::vector<LelongAtom> atoms;
  SmoothPart smooth;        // smooth part of u0
  TimePoly boundary_poly;   // phi = trace of u0 on the boundary + poly(t); poly(0) = 0
  SourceFn source;          // f(z, t)
  MeshControls mesh;
  LadderControls ladder;
  std::vector<double> output_times;

  // u0 and phi evaluation (exact vocabulary, atoms included).
  double u0_at(double x, double y) const;
  double u0_radial_s(double s) const; // requires radial compatibility
  double phi_at(double x, double y, double t) const;
  double phi_dot_at(double x, double y, double t) const;
  double f_at(double x, double y, double t) const;
  double f_dot_at(double x, double y, double t) const;

  bool is_radial() const; // no atoms, or a single atom at the origin
  void validate() const;  // throws std::invalid_argument on violations

  // Canonical semantic serialization and FNV-1a hash over it. Key order,
  // comments and formatting of the source file do not enter.
  std::string canonical() const;
  std::uint64_t hash() const;

  // Equivalent scenario posed on the unit ball; records the scale factor.
  FlowScenario rescaled_to_unit(double* scale_out = nullptr) const;
};

FlowScenario load_scenario(const std::string& path);
FlowScenario parse_scenario(const std::string& toml_text, const std::string& name);

} // namespace maflow

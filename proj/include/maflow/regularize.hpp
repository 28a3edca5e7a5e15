// The approximation ladder: regularized initial data, spliced boundary data,
// the eps_m schedule and the per-rung envelope samples.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "maflow/core.hpp"
#include "maflow/cutoffs.hpp"
#include "maflow/mesh.hpp"
#include "maflow/scenario.hpp"

namespace maflow {

// One regularized problem of the ladder. m = 0 denotes the direct solve of
// raw smooth data (no cutoff, no quadratic lift, phi_m = phi).
struct LadderRung {
  int m = 0;       // rung index; the |z|^2/m lift uses this m
  int atom_m = 0;  // effective cutoff depth (capped by mesh resolution)
  double eps_m = 0.0;
  double sup_abs_g = 0.0;
  double delta_m = 0.0;   // measured sup over the boundary of u0_m - u0
  double sup_u0 = 0.0;    // sup over the mesh of u0_m
  double envelope_B = 0.0;
  double mollify_delta = 0.0;

  std::vector<double> u0; // regularized initial profile at mesh nodes
  std::vector<double> g;  // g_m at mesh nodes (boundary: analytic value)

  BoundaryTimeData samples; // per-rung boundary/source envelope samples

  bool direct() const { return m == 0; }
};

// Largest admissible cutoff depth: the plateau must keep at least two mesh
// cells (radial: above the inner boundary; planar: of radius).
int radial_m_cap(const RadialMesh& mesh);
int planar_m_cap(const PlanarMesh& mesh);

// Mesh for a scenario: inner boundary just below the deepest plateau.
RadialMesh make_radial_mesh(const FlowScenario& sc);

// Regularized initial profile at mesh nodes. Throws when the requested
// cutoff depth exceeds the cap, naming the maximum admissible m.
std::vector<double> regularize_initial_radial(const FlowScenario& sc,
                                              const RadialMesh& mesh, int m,
                                              int atom_m, double mollify_delta);
std::vector<double> regularize_initial_planar(const FlowScenario& sc,
                                              const PlanarMesh& mesh, int m,
                                              int atom_m, double mollify_delta);

// Analytic values of the rung's data at an arbitrary point (used for the
// boundary splice; mollification is inactive away from the cutoff junctions).
double rung_u0_analytic(const FlowScenario& sc, int m, int atom_m, double x,
                        double y);
double rung_g_analytic(const FlowScenario& sc, int m, int atom_m, double x,
                       double y);

// Spliced boundary data phi_m and its time derivative at a boundary point.
double rung_phi(const FlowScenario& sc, const LadderRung& r, double x, double y,
                double t);
double rung_phi_dot(const FlowScenario& sc, const LadderRung& r, double x,
                    double y, double t);

// Builds rung m (>= 1) on the given mesh; prev is the previous rung when
// m > 1 and is used to audit the decreasing eps schedule. Throws on
// non-positive discrete Hessian of u0_m.
LadderRung build_radial_rung(const FlowScenario& sc, const RadialMesh& mesh,
                             int m, const LadderRung* prev);
LadderRung build_planar_rung(const FlowScenario& sc, const PlanarMesh& mesh,
                             int m, const LadderRung* prev);

// Direct rung (m = 0) for smooth scenarios.
LadderRung build_direct_rung_radial(const FlowScenario& sc,
                                    const RadialMesh& mesh);
LadderRung build_direct_rung_planar(const FlowScenario& sc,
                                    const PlanarMesh& mesh);

// Discrete certificates.
bool radial_strictly_psh(const RadialMesh& mesh, const std::vector<double>& v,
                         double floor_val = 1e-12);
bool planar_strictly_subharmonic(
    const PlanarMesh& mesh, const std::vector<double>& v,
    const std::function<double(double, double)>& crossing,
    double floor_val = 1e-12, double* worst = nullptr);

// Discrete 5-point / Shortley-Weller Laplacian at an interior node, given
// values at all nodes plus a callable for boundary crossing values.
template <class BoundaryFn>
double planar_laplacian_at(const PlanarMesh& mesh, const std::vector<double>& u,
                           int flat, BoundaryFn&& bval) {
  const int k = mesh.unknown_of[flat];
  const int side = mesh.side();
  const int i = flat % side, j = flat / side;
  const double h = mesh.h;
  const double tE = mesh.thE[k], tW = mesh.thW[k], tN = mesh.thN[k],
               tS = mesh.thS[k];
  const double x = mesh.xs[i], y = mesh.ys[j];
  const double uE = tE < 1.0f ? bval(x + tE * h, y) : u[flat + 1];
  const double uW = tW < 1.0f ? bval(x - tW * h, y) : u[flat - 1];
  const double uN = tN < 1.0f ? bval(x, y + tN * h) : u[flat + side];
  const double uS = tS < 1.0f ? bval(x, y - tS * h) : u[flat - side];
  const double u0 = u[flat];
  const double lx = 2.0 / (h * h) *
                    (uE / (tE * (tE + tW)) + uW / (tW * (tE + tW)) - u0 / (tE * tW));
  const double ly = 2.0 / (h * h) *
                    (uN / (tN * (tN + tS)) + uS / (tS * (tN + tS)) - u0 / (tN * tS));
  return lx + ly;
}

} // namespace maflow

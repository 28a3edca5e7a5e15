// Smooth flow solver for radially symmetric data on the unit ball, reduced
// to one dimension in s = log|z|: backward Euler in time, damped Newton with
// a direct tridiagonal solve per iteration.
#pragma once

#include <stdexcept>
#include <vector>

#include "maflow/mesh.hpp"
#include "maflow/record.hpp"
#include "maflow/regularize.hpp"
#include "maflow/scenario.hpp"

namespace maflow {

// Determinant of the complex Hessian of u(z) = v(log|z|):
//   v'' (v')^{n-1} e^{-2ns} / 2^{n+1}.
// May return non-positive values; callers guard the log.
double radial_ma_det(double vp, double vpp, double s, int n);

struct NewtonDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConeViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised by run drivers after exhausting dt halvings; carries the position.
struct SolverFailure : std::runtime_error {
  int rung_m;
  double at_time;
  SolverFailure(const std::string& what, int m, double t)
      : std::runtime_error(what), rung_m(m), at_time(t) {}
};

struct NewtonOptions {
  double tolerance = 1e-10; // residual sup-norm
  int max_iterations = 50;
  int max_damping = 40;
  double cone_floor = 1e-12;
};

struct RunOptions {
  double dt_init = 1e-3;
  double dt_growth = 1.2;
  double dt_max = 0.05;
  int max_halvings = 20;
};

struct RadialState {
  double t = 0.0;
  double t_prev = 0.0;
  std::vector<double> v;
  std::vector<double> v_prev;
  int last_newton_iterations = 0;
  double last_residual = 0.0;
};

// Discrete interior derivatives of a profile.
void radial_derivatives(const RadialMesh& mesh, const std::vector<double>& v,
                        int i, double& vp, double& vpp);

// One backward-Euler step to time t_new = t_old + dt. Dirichlet value
// phi_m at s = 0, homogeneous Neumann on the plateau end. Throws
// NewtonDivergence / ConeViolation.
std::vector<double> radial_step_implicit(
    const FlowScenario& sc, const LadderRung& rung, const RadialMesh& mesh,
    const std::vector<double>& v_old, double t_new, double dt,
    const NewtonOptions& opt, int* iterations_out = nullptr,
    double* residual_out = nullptr);

// Full smooth solve of one rung over the scenario's output times.
RunRecord radial_run_flow(const FlowScenario& sc, const RadialMesh& mesh,
                          const LadderRung& rung,
                          const RunOptions& opt = RunOptions{},
                          const NewtonOptions& nopt = NewtonOptions{});

} // namespace maflow

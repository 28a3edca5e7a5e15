// Full 2-D solver for n = 1 on the unit disc, where the operator reduces to
// log(Laplacian/4): backward Euler, damped Newton, Jacobi-preconditioned
// BiCGSTAB on the cut-cell 5-point system.
#pragma once

#include <vector>

#include "maflow/mesh.hpp"
#include "maflow/radial.hpp" // Newton/Run options and solver error types
#include "maflow/record.hpp"
#include "maflow/regularize.hpp"
#include "maflow/scenario.hpp"

namespace maflow {

struct PlanarState {
  double t = 0.0;
  std::vector<double> u; // values at all nodes; exterior entries unused
};

// One backward-Euler step to t_new. Dirichlet values of phi_m apply at
// pinned nodes and at Shortley-Weller crossings.
std::vector<double> planar_step(const FlowScenario& sc, const LadderRung& rung,
                                const PlanarMesh& mesh,
                                const std::vector<double>& u_old, double t_new,
                                double dt, const NewtonOptions& opt,
                                int* iterations_out = nullptr,
                                double* residual_out = nullptr);

RunRecord planar_run(const FlowScenario& sc, const PlanarMesh& mesh,
                     const LadderRung& rung, const RunOptions& opt = RunOptions{},
                     const NewtonOptions& nopt = NewtonOptions{});

} // namespace maflow

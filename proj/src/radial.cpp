#include "maflow/radial.hpp"

#include <algorithm>
#include <cmath>

namespace maflow {

double radial_ma_det(double vp, double vpp, double s, int n) {
  double p = 1.0;
  for (int k = 0; k < n - 1; ++k) p *= vp;
  return vpp * p * std::exp(-2.0 * n * s) / std::pow(2.0, n + 1);
}

void radial_derivatives(const RadialMesh& mesh, const std::vector<double>& v,
                        int i, double& vp, double& vpp) {
  const double h = mesh.h;
  vp = (v[i + 1] - v[i - 1]) / (2.0 * h);
  vpp = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
}

namespace {

bool admissible(const RadialMesh& mesh, const std::vector<double>& v,
                double floor_val) {
  const int M = int(v.size());
  const double h = mesh.h;
  for (int i = 1; i + 1 < M; ++i) {
    const double vpp = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    if (!(vpp > floor_val)) return false;
    if (mesh.n >= 2) {
      const double vp = (v[i + 1] - v[i - 1]) / (2.0 * h);
      if (!(vp > floor_val)) return false;
    }
  }
  return true;
}

// Lift the profile into the admissible cone by adding c (s - s_min)^2 / 2,
// which raises every discrete second difference by c and keeps v' >= 0 gains.
void cone_lift(const RadialMesh& mesh, std::vector<double>& v, double floor_val) {
  const int M = int(v.size());
  const double h = mesh.h;
  double min_vpp = 1e300, min_vp = 1e300;
  for (int i = 1; i + 1 < M; ++i) {
    min_vpp = std::min(min_vpp, (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h));
    min_vp = std::min(min_vp, (v[i + 1] - v[i - 1]) / (2.0 * h));
  }
  double c = 0.0;
  if (min_vpp <= floor_val) c = 2.0 * floor_val - min_vpp;
  if (mesh.n >= 2 && min_vp <= floor_val) {
    // v' gain at node i is c (s_i - s_min); the first interior node gains
    // c h, so scale c to cover the worst monotonicity deficit as well.
    c = std::max(c, (2.0 * floor_val - min_vp) / h);
  }
  if (c > 0.0) {
    for (int i = 0; i < M; ++i) {
      const double d = mesh.s[i] - mesh.s_min;
      v[i] += 0.5 * c * d * d;
    }
  }
}

void thomas_solve(std::vector<double>& a, std::vector<double>& b,
                  std::vector<double>& c, std::vector<double>& rhs) {
  const int M = int(b.size());
  for (int i = 1; i < M; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[M - 1] /= b[M - 1];
  for (int i = M - 2; i >= 0; --i) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

} // namespace

std::vector<double> radial_step_implicit(
    const FlowScenario& sc, const LadderRung& rung, const RadialMesh& mesh,
    const std::vector<double>& v_old, double t_new, double dt,
    const NewtonOptions& opt, int* iterations_out, double* residual_out) {
  const int M = mesh.points();
  const double h = mesh.h;
  const double A = sc.params.A;
  const double phi_b = rung_phi(sc, rung, 1.0, 0.0, t_new);

  std::vector<double> f_new(M);
  for (int i = 0; i < M; ++i)
    f_new[i] = sc.f_at(std::exp(mesh.s[i]), 0.0, t_new);

  std::vector<double> V = v_old;
  cone_lift(mesh, V, opt.cone_floor);

  std::vector<double> R(M), ja(M), jb(M), jc(M);
  auto residual = [&](const std::vector<double>& W, std::vector<double>& out) {
    double sup = 0.0;
    out[0] = W[1] - W[0]; // homogeneous Neumann on the plateau end
    for (int i = 1; i + 1 < M; ++i) {
      double vp, vpp;
      radial_derivatives(mesh, W, i, vp, vpp);
      const double det = radial_ma_det(vp, vpp, mesh.s[i], mesh.n);
      out[i] = (W[i] - v_old[i]) / dt - std::log(det) + A * W[i] - f_new[i];
    }
    out[M - 1] = W[M - 1] - phi_b;
    for (double r : out) sup = std::max(sup, std::abs(r));
    return sup;
  };

  double sup_R = residual(V, R);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (sup_R <= opt.tolerance) break;
    // Tridiagonal Jacobian rows.
    jb[0] = -1.0;
    jc[0] = 1.0;
    ja[0] = 0.0;
    for (int i = 1; i + 1 < M; ++i) {
      double vp, vpp;
      radial_derivatives(mesh, V, i, vp, vpp);
      const double inv_vpp = 1.0 / vpp;
      const double cross = mesh.n >= 2 ? double(mesh.n - 1) / (2.0 * h * vp) : 0.0;
      jb[i] = 1.0 / dt + A + 2.0 * inv_vpp / (h * h);
      jc[i] = -inv_vpp / (h * h) - cross;
      ja[i] = -inv_vpp / (h * h) + cross;
    }
    ja[M - 1] = 0.0;
    jb[M - 1] = 1.0;
    jc[M - 1] = 0.0;

    std::vector<double> rhs(M);
    for (int i = 0; i < M; ++i) rhs[i] = -R[i];
    std::vector<double> a = ja, b = jb, c = jc;
    thomas_solve(a, b, c, rhs);

    // Damping: stay inside the cone and do not let the residual grow.
    double lambda = 1.0;
    std::vector<double> W(M);
    bool accepted = false;
    for (int d = 0; d < opt.max_damping; ++d) {
      for (int i = 0; i < M; ++i) W[i] = V[i] + lambda * rhs[i];
      if (admissible(mesh, W, opt.cone_floor)) {
        std::vector<double> Rt(M);
        const double sup_t = residual(W, Rt);
        if (sup_t <= sup_R * (1.0 - 0.25 * lambda) || sup_t <= opt.tolerance) {
          V.swap(W);
          R.swap(Rt);
          sup_R = sup_t;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // Distinguish a cone obstruction from plain divergence.
      for (int i = 0; i < M; ++i) W[i] = V[i] + std::ldexp(1.0, -opt.max_damping) * rhs[i];
      if (!admissible(mesh, W, opt.cone_floor))
        throw ConeViolation("radial step: no damped Newton step stays admissible");
      throw NewtonDivergence("radial step: damped Newton stalled");
    }
  }
  if (sup_R > opt.tolerance)
    throw NewtonDivergence("radial step: iteration cap exceeded, residual " +
                           std::to_string(sup_R));
  if (iterations_out) *iterations_out = it;
  if (residual_out) *residual_out = sup_R;
  return V;
}

RunRecord radial_run_flow(const FlowScenario& sc, const RadialMesh& mesh,
                          const LadderRung& rung, const RunOptions& opt,
                          const NewtonOptions& nopt) {
  RunRecord rec;
  rec.scenario_name = sc.name;
  rec.scenario_hash = sc.hash();
  rec.solver = "radial";
  rec.rung_m = rung.m;
  rec.atom_m = rung.atom_m;
  rec.eps_m = rung.eps_m;
  rec.sup_abs_g = rung.sup_abs_g;
  rec.delta_m = rung.delta_m;
  rec.sup_u0 = rung.sup_u0;
  rec.envelope_B = rung.envelope_B;
  rec.mollify_delta = rung.mollify_delta;
  rec.envelope_time_samples = int(rung.samples.times.size());
  rec.n = mesh.n;
  rec.radial_points = mesh.points();
  rec.s_min = mesh.s_min;
  rec.h = mesh.h;
  rec.u0 = rung.u0;
  rec.g = rung.g;

  std::vector<double> v = rung.u0;
  double t = 0.0;
  double dt = opt.dt_init;
  size_t oi = 0;
  while (oi < sc.output_times.size()) {
    const double target = sc.output_times[oi];
    double dtc = std::min(dt, target - t);
    int halvings = 0;
    for (;;) {
      try {
        int iters = 0;
        double res = 0.0;
        std::vector<double> v_new = radial_step_implicit(
            sc, rung, mesh, v, t + dtc, dtc, nopt, &iters, &res);
        rec.stats.steps++;
        rec.stats.total_iterations += iters;
        rec.stats.max_iterations = std::max(rec.stats.max_iterations, iters);
        rec.stats.worst_residual = std::max(rec.stats.worst_residual, res);
        t += dtc;
        if (std::abs(t - target) < 1e-13) {
          Snapshot snap;
          snap.t = target;
          snap.dt_used = dtc;
          snap.u = v_new;
          snap.udot.resize(v.size());
          for (size_t i = 0; i < v.size(); ++i)
            snap.udot[i] = (v_new[i] - v[i]) / dtc;
          rec.snapshots.push_back(std::move(snap));
          ++oi;
        }
        v = std::move(v_new);
        break;
      } catch (const NewtonDivergence&) {
        if (++halvings > opt.max_halvings)
          throw SolverFailure("radial run: step failed after " +
                                  std::to_string(opt.max_halvings) +
                                  " dt halvings at t=" + std::to_string(t),
                              rung.m, t);
        rec.stats.dt_halvings++;
        dtc *= 0.5;
      }
    }
    dt = std::min(dt * opt.dt_growth, opt.dt_max);
  }
  rec.validate();
  return rec;
}

} // namespace maflow

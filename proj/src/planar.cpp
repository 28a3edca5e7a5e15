#include "maflow/planar.hpp"

#include <algorithm>
#include <cmath>

namespace maflow {

namespace {

struct ArmCoef {
  double cE, cW, cN, cS, cC; // SW Laplacian coefficients
};

ArmCoef arm_coefficients(const PlanarMesh& mesh, int k) {
  const double h = mesh.h;
  const double tE = mesh.thE[k], tW = mesh.thW[k], tN = mesh.thN[k],
               tS = mesh.thS[k];
  ArmCoef c;
  c.cE = 2.0 / (h * h * tE * (tE + tW));
  c.cW = 2.0 / (h * h * tW * (tE + tW));
  c.cN = 2.0 / (h * h * tN * (tN + tS));
  c.cS = 2.0 / (h * h * tS * (tN + tS));
  c.cC = -2.0 / (h * h * tE * tW) - 2.0 / (h * h * tN * tS);
  return c;
}

// Jacobi-preconditioned BiCGSTAB for the (mildly asymmetric) Newton system.
// Deterministic: fixed iteration order, no randomness.
template <class MatVec>
bool bicgstab(const MatVec& Av, const std::vector<double>& diag,
              const std::vector<double>& b, std::vector<double>& x, double tol,
              int max_iter) {
  const size_t N = b.size();
  x.assign(N, 0.0);
  std::vector<double> r = b, r0 = b, p(N, 0.0), v(N, 0.0), s(N), t(N), z(N),
                      y(N);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double bnorm = 0.0;
  for (double e : b) bnorm = std::max(bnorm, std::abs(e));
  if (bnorm == 0.0) return true;
  const double target = tol * bnorm;
  for (int it = 0; it < max_iter; ++it) {
    double rho_new = 0.0;
    for (size_t i = 0; i < N; ++i) rho_new += r0[i] * r[i];
    if (rho_new == 0.0) return false;
    if (it == 0) {
      p = r;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (size_t i = 0; i < N; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    for (size_t i = 0; i < N; ++i) y[i] = p[i] / diag[i];
    Av(y, v);
    double r0v = 0.0;
    for (size_t i = 0; i < N; ++i) r0v += r0[i] * v[i];
    if (r0v == 0.0) return false;
    alpha = rho / r0v;
    for (size_t i = 0; i < N; ++i) s[i] = r[i] - alpha * v[i];
    double snorm = 0.0;
    for (double e : s) snorm = std::max(snorm, std::abs(e));
    if (snorm <= target) {
      for (size_t i = 0; i < N; ++i) x[i] += alpha * y[i];
      return true;
    }
    for (size_t i = 0; i < N; ++i) z[i] = s[i] / diag[i];
    Av(z, t);
    double tt = 0.0, ts = 0.0;
    for (size_t i = 0; i < N; ++i) {
      tt += t[i] * t[i];
      ts += t[i] * s[i];
    }
    if (tt == 0.0) return false;
    omega = ts / tt;
    for (size_t i = 0; i < N; ++i) {
      x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    double rnorm = 0.0;
    for (double e : r) rnorm = std::max(rnorm, std::abs(e));
    if (rnorm <= target) return true;
    if (omega == 0.0) return false;
  }
  return false;
}

} // namespace

std::vector<double> planar_step(const FlowScenario& sc, const LadderRung& rung,
                                const PlanarMesh& mesh,
                                const std::vector<double>& u_old, double t_new,
                                double dt, const NewtonOptions& opt,
                                int* iterations_out, double* residual_out) {
  const double A = sc.params.A;
  const int K = int(mesh.interior.size());
  const int side = mesh.side();

  auto phi_val = [&](double x, double y) { return rung_phi(sc, rung, x, y, t_new); };

  // Current full-grid field with boundary values at t_new.
  std::vector<double> U = u_old;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = mesh.idx(i, j);
      if (mesh.type[f] == PlanarMesh::NodeType::Pinned) {
        const double x = mesh.xs[i], y = mesh.ys[j];
        const double r = std::max(std::hypot(x, y), 1e-12);
        U[f] = phi_val(x / r, y / r);
      }
    }

  std::vector<double> f_new(K);
  for (int k = 0; k < K; ++k)
    f_new[k] = sc.f_at(mesh.x_of(mesh.interior[k]), mesh.y_of(mesh.interior[k]),
                       t_new);

  std::vector<double> lap(K);
  auto compute_lap = [&](const std::vector<double>& W) {
    bool ok = true;
    for (int k = 0; k < K; ++k) {
      lap[k] = planar_laplacian_at(mesh, W, mesh.interior[k], phi_val);
      if (!(lap[k] > opt.cone_floor)) ok = false;
    }
    return ok;
  };

  // Lift into the admissible cone if needed: adding c |z|^2 / 4 raises the
  // discrete Laplacian by c at uncut nodes (and more at shortened arms).
  if (!compute_lap(U)) {
    double worst = 1e300;
    for (int k = 0; k < K; ++k) worst = std::min(worst, lap[k]);
    const double c = 2.0 * opt.cone_floor - worst;
    for (int f : mesh.interior) {
      const double x = mesh.x_of(f), y = mesh.y_of(f);
      U[f] += 0.25 * c * (x * x + y * y - 1.0); // vanishes on the boundary
    }
    if (!compute_lap(U))
      throw ConeViolation("planar step: cannot lift into the admissible cone");
  }

  std::vector<double> R(K);
  auto residual = [&](const std::vector<double>& W, std::vector<double>& out) {
    double sup = 0.0;
    for (int k = 0; k < K; ++k) {
      const int f = mesh.interior[k];
      const double L = planar_laplacian_at(mesh, W, f, phi_val);
      out[k] = (W[f] - u_old[f]) / dt - std::log(L / 4.0) + A * W[f] - f_new[k];
      sup = std::max(sup, std::abs(out[k]));
    }
    return sup;
  };

  double sup_R = residual(U, R);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (sup_R <= opt.tolerance) break;
    if (!compute_lap(U))
      throw ConeViolation("planar step: left the admissible cone");

    std::vector<double> diag(K);
    for (int k = 0; k < K; ++k) {
      const ArmCoef c = arm_coefficients(mesh, k);
      diag[k] = 1.0 / dt + A - c.cC / lap[k];
    }
    auto matvec = [&](const std::vector<double>& xk, std::vector<double>& out) {
      for (int k = 0; k < K; ++k) {
        const int f = mesh.interior[k];
        const ArmCoef c = arm_coefficients(mesh, k);
        double acc = (1.0 / dt + A + (-c.cC) / lap[k]) * xk[k];
        const int nb[4] = {f + 1, f - 1, f + side, f - side};
        const double cc[4] = {c.cE, c.cW, c.cN, c.cS};
        const float th[4] = {mesh.thE[k], mesh.thW[k], mesh.thN[k], mesh.thS[k]};
        for (int d = 0; d < 4; ++d) {
          if (th[d] < 1.0f) continue; // crossing value is data
          const int uk = mesh.unknown_of[nb[d]];
          if (uk >= 0) acc -= cc[d] / lap[k] * xk[uk];
          // pinned neighbours are data as well
        }
        out[k] = acc;
      }
    };

    std::vector<double> rhs(K), dx(K);
    for (int k = 0; k < K; ++k) rhs[k] = -R[k];
    if (!bicgstab(matvec, diag, rhs, dx, 1e-10, 4000))
      throw NewtonDivergence("planar step: linear solver stalled");

    double lambda = 1.0;
    std::vector<double> W = U;
    bool accepted = false;
    for (int d = 0; d < opt.max_damping; ++d) {
      for (int k = 0; k < K; ++k)
        W[mesh.interior[k]] = U[mesh.interior[k]] + lambda * dx[k];
      bool cone_ok = true;
      for (int k = 0; k < K && cone_ok; ++k) {
        const double L = planar_laplacian_at(mesh, W, mesh.interior[k], phi_val);
        if (!(L > opt.cone_floor)) cone_ok = false;
      }
      if (cone_ok) {
        std::vector<double> Rt(K);
        const double sup_t = residual(W, Rt);
        if (sup_t <= sup_R * (1.0 - 0.25 * lambda) || sup_t <= opt.tolerance) {
          U = W;
          R.swap(Rt);
          sup_R = sup_t;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) throw NewtonDivergence("planar step: damped Newton stalled");
  }
  if (sup_R > opt.tolerance)
    throw NewtonDivergence("planar step: iteration cap exceeded, residual " +
                           std::to_string(sup_R));
  if (iterations_out) *iterations_out = it;
  if (residual_out) *residual_out = sup_R;
  return U;
}

RunRecord planar_run(const FlowScenario& sc, const PlanarMesh& mesh,
                     const LadderRung& rung, const RunOptions& opt,
                     const NewtonOptions& nopt) {
  RunRecord rec;
  rec.scenario_name = sc.name;
  rec.scenario_hash = sc.hash();
  rec.solver = "planar";
  rec.rung_m = rung.m;
  rec.atom_m = rung.atom_m;
  rec.eps_m = rung.eps_m;
  rec.sup_abs_g = rung.sup_abs_g;
  rec.delta_m = rung.delta_m;
  rec.sup_u0 = rung.sup_u0;
  rec.envelope_B = rung.envelope_B;
  rec.mollify_delta = rung.mollify_delta;
  rec.envelope_time_samples = int(rung.samples.times.size());
  rec.n = 1;
  rec.planar_cells = mesh.cells;
  rec.h = mesh.h;
  rec.u0 = rung.u0;
  rec.g = rung.g;

  std::vector<double> u = rung.u0;
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
        std::vector<double> u_new =
            planar_step(sc, rung, mesh, u, t + dtc, dtc, nopt, &iters, &res);
        rec.stats.steps++;
        rec.stats.total_iterations += iters;
        rec.stats.max_iterations = std::max(rec.stats.max_iterations, iters);
        rec.stats.worst_residual = std::max(rec.stats.worst_residual, res);
        t += dtc;
        if (std::abs(t - target) < 1e-13) {
          Snapshot snap;
          snap.t = target;
          snap.dt_used = dtc;
          snap.u = u_new;
          snap.udot.resize(u.size());
          for (size_t i = 0; i < u.size(); ++i)
            snap.udot[i] = (u_new[i] - u[i]) / dtc;
          rec.snapshots.push_back(std::move(snap));
          ++oi;
        }
        u = std::move(u_new);
        break;
      } catch (const NewtonDivergence&) {
        if (++halvings > opt.max_halvings)
          throw SolverFailure("planar run: step failed after " +
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

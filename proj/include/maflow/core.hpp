// Closed-form flow quantities, envelope/continuity bounds and pointwise
// matrix inequality checks shared by the solvers and the diagnostics.
#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace maflow {

struct FlowParams {
  int n = 1;      // complex dimension
  double A = 0.0; // damping coefficient
  double T = 1.0; // time horizon

  FlowParams() = default;
  FlowParams(int n_, double A_, double T_);
};

struct LelongAtom {
  double x = 0.0; // center, planar coordinates (radial scenarios center at 0)
  double y = 0.0;
  double mass = 1.0; // coefficient of log|z - a|
};

// Predicted log-singularity mass remaining at time t from initial mass x.
// The A = 0 branch is selected by exact equality, never by thresholding.
double k_mass(double x, double t, const FlowParams& p);

// Root of t -> k_mass(x, t): predicted dissolution time.
double dissolution_epsilon(double x, const FlowParams& p);

// Lower-continuity modulus C(t):
//   inf over eps in (0,1) of ((-n log eps + A sup|psi| + sup|g|) t - eps inf_rho)
//   + boundary oscillation,
// evaluated by stationarity of the inner term with endpoint fallback.
double continuity_bound_C(double t, int n, double A, double sup_abs_psi,
                          double sup_abs_g, double inf_rho,
                          double boundary_osc);

struct DotUEnvelope {
  double lower;
  double upper;
};

// Two-sided bound on the time derivative at one point. B is the envelope
// constant 2 sup|phi_dot| + T sup|g_dot| + n, precomputed by the caller.
DotUEnvelope dotu_envelopes(double u, double u0_here, double sup_u0, double t,
                            const FlowParams& p, double B);

// Pointwise complex Hessian sample. Checks run in real arithmetic on the
// 2n x 2n Hermitian embedding [[X, -Y], [Y, X]].
struct HermitianSample {
  int n = 0;
  std::vector<std::complex<double>> entries; // row-major n x n

  HermitianSample() = default;
  explicit HermitianSample(int n_);
  std::complex<double>& at(int i, int j) { return entries[size_t(i) * n + j]; }
  const std::complex<double>& at(int i, int j) const {
    return entries[size_t(i) * n + j];
  }
  bool is_hermitian(double tol = 1e-12) const;
};

struct LaplacianCheck {
  double margin_lower; // tr H - n (det H)^{1/n}
  double margin_upper; // n det H (tr H^-1)^{n-1} - tr H
  double det;
  double trace;
  double trace_inv;
  bool ok; // both margins >= -1e-9 relative
};

// Verifies n (det H)^{1/n} <= tr H <= n det H (tr H^-1)^{n-1} for positive
// definite H. Throws std::invalid_argument on non-HPD input.
LaplacianCheck check_laplacian_inequality(const HermitianSample& H);

// Boundary/source samples over [0, T] with cached sup-envelopes entering the
// envelope constant B. Caches equal the max over the sample set and are
// recomputable.
struct BoundaryTimeData {
  std::vector<double> times;
  std::vector<std::vector<double>> phi;     // phi[k][i], boundary point i at times[k]
  std::vector<std::vector<double>> phi_dot;
  std::vector<std::vector<double>> f;       // f[k][j], closure sample j at times[k]
  std::vector<std::vector<double>> f_dot;

  double sup_abs_phi = 0.0;
  double sup_phi_dot = 0.0;
  double sup_abs_f = 0.0;
  double sup_f_dot = 0.0;

  void recompute_envelopes();
  bool envelopes_consistent(double tol = 0.0) const;

  // 2 sup|phi_dot| + T sup|f_dot| + n
  double envelope_B(const FlowParams& p) const;
};

} // namespace maflow

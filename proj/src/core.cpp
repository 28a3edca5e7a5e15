#include "maflow/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maflow {

FlowParams::FlowParams(int n_, double A_, double T_) : n(n_), A(A_), T(T_) {
  if (n < 1) throw std::invalid_argument("FlowParams: n must be >= 1");
  if (A < 0.0) throw std::invalid_argument("FlowParams: A must be >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("FlowParams: T must be > 0");
}

double k_mass(double x, double t, const FlowParams& p) {
  if (!(x > 0.0)) throw std::invalid_argument("k_mass: x must be > 0");
  if (t < 0.0) throw std::invalid_argument("k_mass: t must be >= 0");
  const double twon = 2.0 * p.n;
  if (p.A == 0.0) return x - twon * t;
  return -twon / p.A + (twon / p.A + x) * std::exp(-p.A * t);
}

double dissolution_epsilon(double x, const FlowParams& p) {
  if (!(x > 0.0)) throw std::invalid_argument("dissolution_epsilon: x must be > 0");
  const double twon = 2.0 * p.n;
  if (p.A == 0.0) return x / twon;
  return (std::log(p.A * x + twon) - std::log(twon)) / p.A;
}

double continuity_bound_C(double t, int n, double A, double sup_abs_psi,
                          double sup_abs_g, double inf_rho,
                          double boundary_osc) {
  if (t < 0.0) throw std::invalid_argument("continuity_bound_C: t must be >= 0");
  if (boundary_osc < 0.0)
    throw std::invalid_argument("continuity_bound_C: boundary_osc must be >= 0");
  if (inf_rho > 0.0)
    throw std::invalid_argument("continuity_bound_C: inf_rho must be <= 0");
  if (t == 0.0) return boundary_osc; // the inner infimum vanishes as eps -> 0
  const double a = A * sup_abs_psi + sup_abs_g;
  const double q = -inf_rho; // >= 0
  double inner;
  if (q == 0.0) {
    // F(eps) = (-n log eps + a) t is decreasing; infimum at eps -> 1.
    inner = a * t;
  } else {
    const double eps_star = double(n) * t / q; // stationary point of F
    if (eps_star < 1.0) {
      inner = (-double(n) * std::log(eps_star) + a) * t + double(n) * t;
    } else {
      inner = a * t + q; // F decreasing on (0,1); endpoint eps -> 1
    }
  }
  return inner + boundary_osc;
}

DotUEnvelope dotu_envelopes(double u, double u0_here, double sup_u0, double t,
                            const FlowParams& p, double B) {
  if (!(t > 0.0)) throw std::invalid_argument("dotu_envelopes: t must be > 0");
  if (p.A == 0.0) {
    return {(u - sup_u0) / t - B, (u - u0_here) / t + B};
  }
  const double c = p.A / std::expm1(p.A * t);
  const double lower = c * (u - std::exp(p.A * t) * std::max(sup_u0, 0.0)) - B;
  const double upper = c * (u - u0_here) + B;
  return {lower, upper};
}

HermitianSample::HermitianSample(int n_)
    : n(n_), entries(size_t(n_) * size_t(n_), {0.0, 0.0}) {}

bool HermitianSample::is_hermitian(double tol) const {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto d = at(i, j) - std::conj(at(j, i));
      if (std::abs(d) > tol) return false;
    }
  return true;
}

namespace {

// Cholesky of a dense symmetric positive definite matrix, row-major.
// Returns false if a non-positive pivot is met.
bool cholesky(std::vector<double>& M, int n) {
  for (int j = 0; j < n; ++j) {
    double d = M[size_t(j) * n + j];
    for (int k = 0; k < j; ++k) d -= M[size_t(j) * n + k] * M[size_t(j) * n + k];
    if (!(d > 0.0)) return false;
    const double l = std::sqrt(d);
    M[size_t(j) * n + j] = l;
    for (int i = j + 1; i < n; ++i) {
      double s = M[size_t(i) * n + j];
      for (int k = 0; k < j; ++k) s -= M[size_t(i) * n + k] * M[size_t(j) * n + k];
      M[size_t(i) * n + j] = s / l;
    }
  }
  return true;
}

// Solve L L^T x = b in place using the Cholesky factor stored in M.
void chol_solve(const std::vector<double>& M, int n, std::vector<double>& b) {
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= M[size_t(i) * n + k] * b[k];
    b[i] = s / M[size_t(i) * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= M[size_t(k) * n + i] * b[k];
    b[i] = s / M[size_t(i) * n + i];
  }
}

} // namespace

LaplacianCheck check_laplacian_inequality(const HermitianSample& H) {
  const int n = H.n;
  if (n < 1) throw std::invalid_argument("check_laplacian_inequality: empty matrix");
  if (!H.is_hermitian(1e-10))
    throw std::invalid_argument("check_laplacian_inequality: matrix not Hermitian");

  // Real embedding E = [[X, -Y], [Y, X]] of H = X + iY; E is symmetric and
  // positive definite iff H is, with det E = (det H)^2 and tr E^-1 = 2 tr H^-1.
  const int N = 2 * n;
  std::vector<double> E(size_t(N) * N, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = H.at(i, j).real();
      const double y = H.at(i, j).imag();
      E[size_t(i) * N + j] = x;
      E[size_t(i + n) * N + (j + n)] = x;
      E[size_t(i) * N + (j + n)] = -y;
      E[size_t(i + n) * N + j] = y;
    }

  std::vector<double> L = E;
  if (!cholesky(L, N))
    throw std::invalid_argument(
        "check_laplacian_inequality: matrix not positive definite");

  double log_det_E = 0.0;
  for (int i = 0; i < N; ++i) log_det_E += 2.0 * std::log(L[size_t(i) * N + i]);
  const double det = std::exp(0.5 * log_det_E);

  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += H.at(i, i).real();

  double trace_inv_E = 0.0;
  std::vector<double> col(N);
  for (int j = 0; j < N; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    chol_solve(L, N, col);
    trace_inv_E += col[j];
  }
  const double trace_inv = 0.5 * trace_inv_E;

  LaplacianCheck out;
  out.det = det;
  out.trace = trace;
  out.trace_inv = trace_inv;
  out.margin_lower = trace - double(n) * std::pow(det, 1.0 / n);
  out.margin_upper = double(n) * det * std::pow(trace_inv, n - 1) - trace;
  const double scale = std::max(1.0, std::abs(trace));
  out.ok = out.margin_lower >= -1e-9 * scale && out.margin_upper >= -1e-9 * scale;
  return out;
}

void BoundaryTimeData::recompute_envelopes() {
  auto max_abs = [](const std::vector<std::vector<double>>& rows) {
    double m = 0.0;
    for (const auto& r : rows)
      for (double v : r) m = std::max(m, std::abs(v));
    return m;
  };
  sup_abs_phi = max_abs(phi);
  sup_phi_dot = max_abs(phi_dot);
  sup_abs_f = max_abs(f);
  sup_f_dot = max_abs(f_dot);
}

bool BoundaryTimeData::envelopes_consistent(double tol) const {
  BoundaryTimeData c = *this;
  c.recompute_envelopes();
  return std::abs(c.sup_abs_phi - sup_abs_phi) <= tol &&
         std::abs(c.sup_phi_dot - sup_phi_dot) <= tol &&
         std::abs(c.sup_abs_f - sup_abs_f) <= tol &&
         std::abs(c.sup_f_dot - sup_f_dot) <= tol;
}

double BoundaryTimeData::envelope_B(const FlowParams& p) const {
  return 2.0 * sup_phi_dot + p.T * sup_f_dot + double(p.n);
}

} // namespace maflow

#include "maflow/cutoffs.hpp"

#include <cmath>
#include <stdexcept>

namespace maflow {

namespace {

double eval_poly(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

double eval_poly_d1(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t k = c.size(); k-- > 1;) v = v * x + double(k) * c[k];
  return v;
}

double eval_poly_d2(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t k = c.size(); k-- > 2;) v = v * x + double(k) * double(k - 1) * c[k];
  return v;
}

} // namespace

double SmoothCutoffChi::value(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return x;
  return eval_poly(pieces[0].coef, x);
}

double SmoothCutoffChi::d1(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return eval_poly_d1(pieces[0].coef, x);
}

double SmoothCutoffChi::d2(double x) const {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return eval_poly_d2(pieces[0].coef, x);
}

SmoothCutoffChi build_chi() {
  // (1+x)^3 (3-x) / 16 on [-1, 1): the unique quartic joining the flat and
  // identity branches with two continuous derivatives. Its second derivative
  // is 3(1-x^2)/4 >= 0, so the result is convex with chi' in [0, 1].
  SmoothCutoffChi chi;
  chi.pieces.push_back({-1.0, 1.0, {3.0 / 16, 8.0 / 16, 6.0 / 16, 0.0, -1.0 / 16}});
  return chi;
}

double TimeCutoffZeta::value(double x) const {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  return eval_poly(pieces[0].coef, x);
}

double TimeCutoffZeta::d1(double x) const {
  if (x <= 1.0 || x >= 2.0) return 0.0;
  return eval_poly_d1(pieces[0].coef, x);
}

TimeCutoffZeta build_zeta() {
  // 1 - S(x-1) with S the quintic smoothstep 6u^5 - 15u^4 + 10u^3.
  // Expanded in powers of x on [1, 2).
  const double a = 6.0, b = -15.0, c = 10.0; // coefficients of u^5, u^4, u^3
  // S(x-1) = a(x-1)^5 + b(x-1)^4 + c(x-1)^3; expand via binomials.
  std::vector<double> s(6, 0.0);
  const double binom5[6] = {1, 5, 10, 10, 5, 1};
  const double binom4[5] = {1, 4, 6, 4, 1};
  const double binom3[4] = {1, 3, 3, 1};
  for (int k = 0; k <= 5; ++k) s[k] += a * binom5[k] * ((5 - k) % 2 ? -1.0 : 1.0);
  for (int k = 0; k <= 4; ++k) s[k] += b * binom4[k] * ((4 - k) % 2 ? -1.0 : 1.0);
  for (int k = 0; k <= 3; ++k) s[k] += c * binom3[k] * ((3 - k) % 2 ? -1.0 : 1.0);
  std::vector<double> z(6, 0.0);
  for (int k = 0; k <= 5; ++k) z[k] = -s[k];
  z[0] += 1.0;
  TimeCutoffZeta zeta;
  zeta.pieces.push_back({1.0, 2.0, z});
  return zeta;
}

AtomRegularizer::AtomRegularizer(int m_) : m(m_), chi(build_chi()) {
  if (m < 1) throw std::invalid_argument("AtomRegularizer: m must be >= 1");
}

double AtomRegularizer::value_s(double s) const { return chi.value(s + m) - m; }
double AtomRegularizer::d1_s(double s) const { return chi.d1(s + m); }
double AtomRegularizer::d2_s(double s) const { return chi.d2(s + m); }

double AtomRegularizer::value_r(double r) const {
  if (!(r > 0.0)) return -double(m); // the plateau value extends to the vertex
  return value_s(std::log(r));
}

double AtomRegularizer::plateau_radius() const { return std::exp(-double(m) - 1.0); }
double AtomRegularizer::identity_radius() const { return std::exp(1.0 - double(m)); }

double AtomRegularizer::mollified_s(double s, double delta) const {
  if (!(delta > 0.0)) return value_s(s);
  // Inside a pure branch nothing changes: the kernel has unit mass and odd
  // moments vanish, so constants and the identity convolve to themselves.
  if (s + delta <= -(double(m) + 1.0) || s - delta >= 1.0 - double(m))
    return value_s(s);
  // 8-point Gauss-Legendre on [-delta, delta] against the C^2 bump
  // K(u) = (35/32)(1 - (u/delta)^2)^3 / delta.
  static const double gx[8] = {-0.9602898564975363, -0.7966664774136267,
                               -0.5255324099163290, -0.1834346424956498,
                               0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
  static const double gw[8] = {0.1012285362903763, 0.2223810344533745,
                               0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double u = gx[i] * delta;
    const double one = 1.0 - (u / delta) * (u / delta);
    const double K = (35.0 / 32.0) * one * one * one / delta;
    acc += gw[i] * delta * K * value_s(s - u);
  }
  return acc;
}

} // namespace maflow

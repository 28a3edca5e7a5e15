// C^2 piecewise-polynomial cutoffs: the convex ramp chi used to flatten
// logarithmic atoms and the decreasing time rolloff zeta used to splice
// boundary data, plus the per-atom profile w_m built from chi.
#pragma once

#include <vector>

namespace maflow {

// One polynomial piece valid on [lo, hi), coefficients in powers of x.
struct PolyPiece {
  double lo;
  double hi;
  std::vector<double> coef;
};

// Increasing convex C^2 function, identically 0 on (-inf,-1] and equal to
// the identity on [1, inf).
struct SmoothCutoffChi {
  std::vector<PolyPiece> pieces; // transition pieces on [-1, 1)
  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
};

// Decreasing C^2 function, identically 1 on (-inf,1] and 0 on [2, inf).
struct TimeCutoffZeta {
  std::vector<PolyPiece> pieces; // transition pieces on [1, 2)
  double value(double x) const;
  double d1(double x) const;
};

SmoothCutoffChi build_chi();
TimeCutoffZeta build_zeta();

// Regularized atom profile w_m(z) = chi(log|z - a| + m) - m as a function of
// s = log|z - a|. Constant -m for s <= -(m+1), equal to s for s >= 1 - m.
struct AtomRegularizer {
  int m = 1;
  SmoothCutoffChi chi;

  explicit AtomRegularizer(int m_);
  double value_s(double s) const;       // w_m at s = log r
  double d1_s(double s) const;
  double d2_s(double s) const;
  double value_r(double r) const;       // w_m at radius r > 0
  double plateau_radius() const;        // e^{-m-1}
  double identity_radius() const;       // e^{1-m}

  // Value mollified in s with a compactly supported C^2 kernel of radius
  // delta (Gauss-Legendre quadrature of the convolution integral).
  double mollified_s(double s, double delta) const;
};

} // namespace maflow

#include "maflow/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "maflow/radial.hpp"

namespace maflow {

RadialMesh RadialMesh::make(int n, double s_min, int points) {
  if (points < 100)
    throw std::invalid_argument("RadialMesh: at least 100 points required");
  if (!(s_min < 0.0)) throw std::invalid_argument("RadialMesh: s_min must be < 0");
  RadialMesh m;
  m.n = n;
  m.s_min = s_min;
  m.h = -s_min / double(points - 1);
  m.s.resize(points);
  for (int i = 0; i < points; ++i) m.s[i] = s_min + m.h * i;
  m.s.back() = 0.0;
  return m;
}

PlanarMesh PlanarMesh::make_disc(int cells) {
  if (cells < 16) throw std::invalid_argument("PlanarMesh: too few cells");
  PlanarMesh m;
  m.cells = cells;
  m.h = 2.0 / cells;
  const int side = cells + 1;
  m.xs.resize(side);
  m.ys.resize(side);
  for (int i = 0; i < side; ++i) m.xs[i] = -1.0 + m.h * i;
  m.ys = m.xs;
  m.type.assign(size_t(side) * side, NodeType::Exterior);
  m.unknown_of.assign(size_t(side) * side, -1);

  auto r2 = [&](int i, int j) {
    return m.xs[i] * m.xs[i] + m.ys[j] * m.ys[j];
  };
  // Inside nodes; those within snap_fraction*h of the circle get pinned.
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      if (r2(i, j) >= 1.0) continue;
      const double r = std::sqrt(r2(i, j));
      m.type[m.idx(i, j)] =
          (1.0 - r < snap_fraction * m.h) ? NodeType::Pinned : NodeType::Interior;
    }
  // A node whose arm would be cut at a fraction below snap becomes pinned too.
  auto crossing = [&](double x, double y, double dx, double dy) {
    // smallest theta in (0,1] with |(x,y) + theta*h*(dx,dy)| = 1
    const double a = m.h * m.h * (dx * dx + dy * dy);
    const double b = 2.0 * m.h * (x * dx + y * dy);
    const double c = x * x + y * y - 1.0;
    const double disc = b * b - 4.0 * a * c;
    const double root = (-b + std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
    return root;
  };
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 1; j < side - 1; ++j)
      for (int i = 1; i < side - 1; ++i) {
        const int f = m.idx(i, j);
        if (m.type[f] != NodeType::Interior) continue;
        const double x = m.xs[i], y = m.ys[j];
        const int nb[4] = {m.idx(i + 1, j), m.idx(i - 1, j), m.idx(i, j + 1),
                           m.idx(i, j - 1)};
        const double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (int d = 0; d < 4; ++d) {
          if (m.type[nb[d]] != NodeType::Exterior) continue;
          const double th = crossing(x, y, dirs[d][0], dirs[d][1]);
          if (th < snap_fraction) {
            m.type[f] = NodeType::Pinned;
            break;
          }
        }
      }
  }
  // Collect interior unknowns and their arm fractions.
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = m.idx(i, j);
      if (m.type[f] != NodeType::Interior) continue;
      m.unknown_of[f] = int(m.interior.size());
      m.interior.push_back(f);
    }
  const int k_n = int(m.interior.size());
  m.thE.assign(k_n, 1.0f);
  m.thW.assign(k_n, 1.0f);
  m.thN.assign(k_n, 1.0f);
  m.thS.assign(k_n, 1.0f);
  for (int k = 0; k < k_n; ++k) {
    const int f = m.interior[k];
    const int i = f % side, j = f / side;
    const double x = m.xs[i], y = m.ys[j];
    struct Arm {
      int nb;
      double dx, dy;
      std::vector<float>* th;
    } arms[4] = {{m.idx(i + 1, j), 1, 0, &m.thE},
                 {m.idx(i - 1, j), -1, 0, &m.thW},
                 {m.idx(i, j + 1), 0, 1, &m.thN},
                 {m.idx(i, j - 1), 0, -1, &m.thS}};
    for (auto& a : arms) {
      if (m.type[a.nb] == NodeType::Exterior) {
        const double th = std::clamp(crossing(x, y, a.dx, a.dy),
                                     double(snap_fraction), 1.0);
        (*a.th)[k] = float(th);
      }
    }
  }
  return m;
}

int radial_m_cap(const RadialMesh& mesh) {
  return int(std::floor(-mesh.s_min - 1.0 - 2.0 * mesh.h));
}

int planar_m_cap(const PlanarMesh& mesh) {
  return std::max(0, int(std::floor(-std::log(2.0 * mesh.h) - 1.0)));
}

RadialMesh make_radial_mesh(const FlowScenario& sc) {
  double depth;
  if (sc.atoms.empty()) {
    depth = 6.0; // no plateau to resolve
  } else {
    depth = double(sc.ladder.rungs) + 1.0 +
            std::max(sc.mesh.radial_depth_margin, 0.3);
  }
  return RadialMesh::make(sc.params.n, -depth, sc.mesh.radial_points);
}

namespace {

double atom_part_s(const FlowScenario& sc, int atom_m, double s,
                   double mollify_delta) {
  if (sc.atoms.empty() || atom_m == 0) return 0.0;
  const AtomRegularizer w(atom_m);
  return sc.atoms[0].mass * (mollify_delta > 0.0 ? w.mollified_s(s, mollify_delta)
                                                 : w.value_s(s));
}

} // namespace

std::vector<double> regularize_initial_radial(const FlowScenario& sc,
                                              const RadialMesh& mesh, int m,
                                              int atom_m, double mollify_delta) {
  const int cap = radial_m_cap(mesh);
  if (!sc.atoms.empty() && atom_m > cap)
    throw std::invalid_argument(
        "regularize_initial: mesh too coarse for cutoff depth m=" +
        std::to_string(atom_m) + "; maximum admissible m=" + std::to_string(cap));
  std::vector<double> v(mesh.s.size());
  for (size_t i = 0; i < mesh.s.size(); ++i) {
    const double s = mesh.s[i];
    double val = sc.smooth.value_s(s) + atom_part_s(sc, atom_m, s, mollify_delta);
    if (m > 0) val += std::exp(2.0 * s) / double(m);
    v[i] = val;
  }
  return v;
}

std::vector<double> regularize_initial_planar(const FlowScenario& sc,
                                              const PlanarMesh& mesh, int m,
                                              int atom_m, double mollify_delta) {
  const int cap = planar_m_cap(mesh);
  if (!sc.atoms.empty() && atom_m > cap)
    throw std::invalid_argument(
        "regularize_initial: mesh too coarse for cutoff depth m=" +
        std::to_string(atom_m) + "; maximum admissible m=" + std::to_string(cap));
  const int side = mesh.side();
  std::vector<double> u(size_t(side) * side, 0.0);
  std::optional<AtomRegularizer> w;
  if (!sc.atoms.empty()) w.emplace(atom_m);
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = mesh.idx(i, j);
      if (mesh.type[f] == PlanarMesh::NodeType::Exterior) continue;
      const double x = mesh.xs[i], y = mesh.ys[j];
      double val = sc.smooth.value_r2(x * x + y * y);
      for (const auto& a : sc.atoms) {
        const double d2 = (x - a.x) * (x - a.x) + (y - a.y) * (y - a.y);
        const double s = 0.5 * std::log(std::max(d2, 1e-300));
        val += a.mass * (mollify_delta > 0.0 ? w->mollified_s(s, mollify_delta)
                                             : w->value_s(s));
      }
      if (m > 0) val += (x * x + y * y) / double(m);
      u[f] = val;
    }
  return u;
}

double rung_u0_analytic(const FlowScenario& sc, int m, int atom_m, double x,
                        double y) {
  double val = sc.smooth.value_r2(x * x + y * y);
  if (!sc.atoms.empty() && atom_m > 0) {
    const AtomRegularizer w(atom_m);
    for (const auto& a : sc.atoms) {
      const double d = std::hypot(x - a.x, y - a.y);
      val += a.mass * w.value_r(d);
    }
  } else {
    for (const auto& a : sc.atoms)
      val += a.mass * std::log(std::hypot(x - a.x, y - a.y));
  }
  if (m > 0) val += (x * x + y * y) / double(m);
  return val;
}

double rung_g_analytic(const FlowScenario& sc, int m, int atom_m, double x,
                       double y) {
  const double r2 = x * x + y * y;
  const double u0 = rung_u0_analytic(sc, m, atom_m, x, y);
  double det;
  if (sc.params.n == 1) {
    // det = Laplacian / 4; atoms contribute w''(s) e^{-2s} around their center.
    double lap = 4.0 * (sc.smooth.d_r2(r2) + r2 * sc.smooth.d2_r2(r2));
    if (m > 0) lap += 4.0 / double(m);
    if (!sc.atoms.empty() && atom_m > 0) {
      const AtomRegularizer w(atom_m);
      for (const auto& a : sc.atoms) {
        const double d2 = (x - a.x) * (x - a.x) + (y - a.y) * (y - a.y);
        const double s = 0.5 * std::log(std::max(d2, 1e-300));
        lap += a.mass * w.d2_s(s) * std::exp(-2.0 * s);
      }
    }
    det = lap / 4.0;
  } else {
    // Radial scenarios only (validated): evaluate in s = log r.
    const double s = 0.5 * std::log(std::max(r2, 1e-300));
    double vp = sc.smooth.d1_s(s);
    double vpp = sc.smooth.d2_s(s);
    if (m > 0) {
      vp += 2.0 * std::exp(2.0 * s) / double(m);
      vpp += 4.0 * std::exp(2.0 * s) / double(m);
    }
    if (!sc.atoms.empty() && atom_m > 0) {
      const AtomRegularizer w(atom_m);
      vp += sc.atoms[0].mass * w.d1_s(s);
      vpp += sc.atoms[0].mass * w.d2_s(s);
    }
    det = radial_ma_det(vp, vpp, s, sc.params.n);
  }
  if (!(det > 0.0))
    throw std::runtime_error("rung_g_analytic: non-positive determinant");
  return std::log(det) - sc.params.A * u0 + sc.f_at(x, y, 0.0);
}

double rung_phi(const FlowScenario& sc, const LadderRung& r, double x, double y,
                double t) {
  if (r.direct()) return sc.phi_at(x, y, t);
  static const TimeCutoffZeta zeta = build_zeta();
  const double z = zeta.value(t / r.eps_m);
  if (z == 0.0) return sc.phi_at(x, y, t);
  const double u0m = rung_u0_analytic(sc, r.m, r.atom_m, x, y);
  const double gm = rung_g_analytic(sc, r.m, r.atom_m, x, y);
  return z * (t * gm + u0m) + (1.0 - z) * sc.phi_at(x, y, t);
}

double rung_phi_dot(const FlowScenario& sc, const LadderRung& r, double x,
                    double y, double t) {
  if (r.direct()) return sc.phi_dot_at(x, y, t);
  static const TimeCutoffZeta zeta = build_zeta();
  const double z = zeta.value(t / r.eps_m);
  const double zp = zeta.d1(t / r.eps_m) / r.eps_m;
  const double phi = sc.phi_at(x, y, t);
  const double phid = sc.phi_dot_at(x, y, t);
  if (z == 0.0 && zp == 0.0) return phid;
  const double u0m = rung_u0_analytic(sc, r.m, r.atom_m, x, y);
  const double gm = rung_g_analytic(sc, r.m, r.atom_m, x, y);
  return zp * (t * gm + u0m - phi) + z * gm + (1.0 - z) * phid;
}

bool radial_strictly_psh(const RadialMesh& mesh, const std::vector<double>& v,
                         double floor_val) {
  const double h = mesh.h;
  for (size_t i = 1; i + 1 < v.size(); ++i) {
    const double vp = (v[i + 1] - v[i - 1]) / (2.0 * h);
    const double vpp = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    if (!(vpp > floor_val)) return false;
    if (mesh.n >= 2 && !(vp > floor_val)) return false;
  }
  return true;
}

bool planar_strictly_subharmonic(
    const PlanarMesh& mesh, const std::vector<double>& v,
    const std::function<double(double, double)>& crossing, double floor_val,
    double* worst) {
  bool ok = true;
  double w = 1e300;
  for (int f : mesh.interior) {
    const double lap = planar_laplacian_at(mesh, v, f, crossing);
    w = std::min(w, lap);
    if (!(lap > floor_val)) ok = false;
  }
  if (worst) *worst = w;
  return ok;
}

namespace {

template <class CrossFn>
bool planar_cert(const PlanarMesh& mesh, const std::vector<double>& v,
                 CrossFn&& cross, double floor_val, double* worst = nullptr) {
  return planar_strictly_subharmonic(mesh, v, cross, floor_val, worst);
}

BoundaryTimeData sample_rung_envelopes(const FlowScenario& sc,
                                       const LadderRung& r, bool planar) {
  BoundaryTimeData d;
  const double T = sc.params.T;
  std::vector<double> ts;
  const int coarse = 161, fine = 161;
  for (int k = 0; k < coarse; ++k) ts.push_back(T * k / double(coarse - 1));
  if (!r.direct()) {
    const double tf = std::min(2.5 * r.eps_m, T);
    for (int k = 0; k < fine; ++k) ts.push_back(tf * k / double(fine - 1));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  d.times = ts;

  std::vector<std::pair<double, double>> bpts;
  if (planar) {
    const int na = 64;
    for (int k = 0; k < na; ++k) {
      const double th = 2.0 * M_PI * k / na;
      bpts.emplace_back(std::cos(th), std::sin(th));
    }
  } else {
    bpts.emplace_back(1.0, 0.0);
  }
  d.phi.resize(ts.size());
  d.phi_dot.resize(ts.size());
  d.f.resize(ts.size());
  d.f_dot.resize(ts.size());
  const int nf = 128; // radial stations for the source samples
  for (size_t k = 0; k < ts.size(); ++k) {
    const double t = ts[k];
    d.phi[k].reserve(bpts.size());
    d.phi_dot[k].reserve(bpts.size());
    for (auto [x, y] : bpts) {
      d.phi[k].push_back(rung_phi(sc, r, x, y, t));
      d.phi_dot[k].push_back(rung_phi_dot(sc, r, x, y, t));
    }
    d.f[k].reserve(nf);
    d.f_dot[k].reserve(nf);
    for (int i = 0; i < nf; ++i) {
      const double rr = double(i) / (nf - 1);
      d.f[k].push_back(sc.f_at(rr, 0.0, t));
      d.f_dot[k].push_back(sc.f_dot_at(rr, 0.0, t));
    }
  }
  d.recompute_envelopes();
  return d;
}

void audit_schedule(const LadderRung& r, const LadderRung* prev) {
  if (!prev || prev->direct()) return;
  if (!(r.eps_m < prev->eps_m))
    throw std::logic_error("ladder: eps_m schedule not decreasing");
  if (!(r.eps_m * r.sup_abs_g < prev->eps_m * prev->sup_abs_g + 1e-300))
    throw std::logic_error("ladder: eps_m*sup|g_m| schedule not decreasing");
}

} // namespace

LadderRung build_radial_rung(const FlowScenario& sc, const RadialMesh& mesh,
                             int m, const LadderRung* prev) {
  if (m < 1) throw std::invalid_argument("build_radial_rung: m must be >= 1");
  LadderRung r;
  r.m = m;
  r.atom_m = sc.atoms.empty() ? 0 : std::min(m, radial_m_cap(mesh));
  r.mollify_delta = sc.atoms.empty() ? 0.0 : mesh.h;
  r.u0 = regularize_initial_radial(sc, mesh, m, r.atom_m, r.mollify_delta);
  if (!radial_strictly_psh(mesh, r.u0))
    throw std::runtime_error(
        "build_radial_rung: regularized data not strictly plurisubharmonic "
        "on the mesh (regularization insufficient)");

  const int M = mesh.points();
  r.g.resize(M);
  for (int i = 1; i + 1 < M; ++i) {
    const double vp = (r.u0[i + 1] - r.u0[i - 1]) / (2.0 * mesh.h);
    const double vpp = (r.u0[i + 1] - 2.0 * r.u0[i] + r.u0[i - 1]) / (mesh.h * mesh.h);
    const double det = radial_ma_det(vp, vpp, mesh.s[i], mesh.n);
    if (!(det > 0.0))
      throw std::runtime_error("build_radial_rung: non-positive discrete Hessian");
    const double rr = std::exp(mesh.s[i]);
    r.g[i] = std::log(det) - sc.params.A * r.u0[i] + sc.f_at(rr, 0.0, 0.0);
  }
  r.g[0] = r.g[1];
  r.g[M - 1] = rung_g_analytic(sc, m, r.atom_m, 1.0, 0.0);

  r.sup_abs_g = 0.0;
  for (double gv : r.g) r.sup_abs_g = std::max(r.sup_abs_g, std::abs(gv));
  r.eps_m = std::pow(2.0, -m) / (1.0 + r.sup_abs_g);
  r.delta_m = r.u0[M - 1] - sc.u0_radial_s(0.0);
  r.sup_u0 = *std::max_element(r.u0.begin(), r.u0.end());
  audit_schedule(r, prev);
  r.samples = sample_rung_envelopes(sc, r, false);
  r.envelope_B = r.samples.envelope_B(sc.params);
  return r;
}

LadderRung build_planar_rung(const FlowScenario& sc, const PlanarMesh& mesh,
                             int m, const LadderRung* prev) {
  if (m < 1) throw std::invalid_argument("build_planar_rung: m must be >= 1");
  LadderRung r;
  r.m = m;
  r.mollify_delta = 0.0;
  const int cap = sc.atoms.empty() ? 0 : planar_m_cap(mesh);
  int atom_m = sc.atoms.empty() ? 0 : std::min(m, cap);

  // Retreat until the discrete subharmonicity certificate holds: the cut-cell
  // grid trips it slightly before the two-cell plateau rule does.
  for (;;) {
    r.atom_m = atom_m;
    r.u0 = regularize_initial_planar(sc, mesh, m, atom_m, r.mollify_delta);
    auto cross = [&](double x, double y) {
      return rung_u0_analytic(sc, m, atom_m, x, y);
    };
    double worst;
    if (planar_cert(mesh, r.u0, cross, 1e-12, &worst)) break;
    if (sc.atoms.empty() || atom_m <= 1)
      throw std::runtime_error(
          "build_planar_rung: non-positive discrete Hessian of u0_m "
          "(regularization insufficient), worst Laplacian " +
          std::to_string(worst));
    --atom_m;
  }

  const int side = mesh.side();
  r.g.assign(size_t(side) * side, 0.0);
  auto cross = [&](double x, double y) {
    return rung_u0_analytic(sc, m, r.atom_m, x, y);
  };
  for (int f : mesh.interior) {
    const double lap = planar_laplacian_at(mesh, r.u0, f, cross);
    const double x = mesh.x_of(f), y = mesh.y_of(f);
    r.g[f] = std::log(lap / 4.0) - sc.params.A * r.u0[f] + sc.f_at(x, y, 0.0);
  }
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = mesh.idx(i, j);
      if (mesh.type[f] == PlanarMesh::NodeType::Pinned)
        r.g[f] = rung_g_analytic(sc, m, r.atom_m, mesh.xs[i], mesh.ys[j]);
    }

  r.sup_abs_g = 0.0;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = mesh.idx(i, j);
      if (mesh.type[f] != PlanarMesh::NodeType::Exterior)
        r.sup_abs_g = std::max(r.sup_abs_g, std::abs(r.g[f]));
    }
  r.eps_m = std::pow(2.0, -m) / (1.0 + r.sup_abs_g);

  double delta = 0.0, sup_u0 = -1e300;
  const int na = 256;
  for (int k = 0; k < na; ++k) {
    const double th = 2.0 * M_PI * k / na;
    const double x = std::cos(th), y = std::sin(th);
    delta = std::max(delta, rung_u0_analytic(sc, m, r.atom_m, x, y) -
                                sc.u0_at(x, y));
  }
  r.delta_m = delta;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = mesh.idx(i, j);
      if (mesh.type[f] != PlanarMesh::NodeType::Exterior)
        sup_u0 = std::max(sup_u0, r.u0[f]);
    }
  r.sup_u0 = sup_u0;
  audit_schedule(r, prev);
  r.samples = sample_rung_envelopes(sc, r, true);
  r.envelope_B = r.samples.envelope_B(sc.params);
  return r;
}

namespace {

LadderRung build_direct_common(const FlowScenario& sc) {
  if (!sc.atoms.empty())
    throw std::invalid_argument("direct rung requires smooth data (no atoms)");
  LadderRung r;
  r.m = 0;
  r.atom_m = 0;
  r.eps_m = 0.0;
  r.delta_m = 0.0;
  return r;
}

} // namespace

LadderRung build_direct_rung_radial(const FlowScenario& sc,
                                    const RadialMesh& mesh) {
  LadderRung r = build_direct_common(sc);
  r.u0 = regularize_initial_radial(sc, mesh, 0, 0, 0.0);
  if (!radial_strictly_psh(mesh, r.u0))
    throw std::runtime_error(
        "direct rung: data not strictly plurisubharmonic on the mesh");
  const int M = mesh.points();
  r.g.resize(M);
  for (int i = 1; i + 1 < M; ++i) {
    const double vp = (r.u0[i + 1] - r.u0[i - 1]) / (2.0 * mesh.h);
    const double vpp = (r.u0[i + 1] - 2.0 * r.u0[i] + r.u0[i - 1]) / (mesh.h * mesh.h);
    const double rr = std::exp(mesh.s[i]);
    r.g[i] = std::log(radial_ma_det(vp, vpp, mesh.s[i], mesh.n)) -
             sc.params.A * r.u0[i] + sc.f_at(rr, 0.0, 0.0);
  }
  r.g[0] = r.g[1];
  r.g[M - 1] = rung_g_analytic(sc, 0, 0, 1.0, 0.0);
  for (double gv : r.g) r.sup_abs_g = std::max(r.sup_abs_g, std::abs(gv));
  r.sup_u0 = *std::max_element(r.u0.begin(), r.u0.end());
  r.samples = sample_rung_envelopes(sc, r, false);
  r.envelope_B = r.samples.envelope_B(sc.params);
  return r;
}

LadderRung build_direct_rung_planar(const FlowScenario& sc,
                                    const PlanarMesh& mesh) {
  LadderRung r = build_direct_common(sc);
  r.u0 = regularize_initial_planar(sc, mesh, 0, 0, 0.0);
  auto cross = [&](double x, double y) { return rung_u0_analytic(sc, 0, 0, x, y); };
  double worst;
  if (!planar_cert(mesh, r.u0, cross, 1e-12, &worst))
    throw std::runtime_error(
        "direct rung: data not strictly subharmonic on the mesh");
  const int side = mesh.side();
  r.g.assign(size_t(side) * side, 0.0);
  for (int f : mesh.interior) {
    const double lap = planar_laplacian_at(mesh, r.u0, f, cross);
    r.g[f] = std::log(lap / 4.0) - sc.params.A * r.u0[f] +
             sc.f_at(mesh.x_of(f), mesh.y_of(f), 0.0);
  }
  double sup_u0 = -1e300;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int f = mesh.idx(i, j);
      if (mesh.type[f] != PlanarMesh::NodeType::Exterior) {
        sup_u0 = std::max(sup_u0, r.u0[f]);
        r.sup_abs_g = std::max(r.sup_abs_g, std::abs(r.g[f]));
      }
    }
  r.sup_u0 = sup_u0;
  r.samples = sample_rung_envelopes(sc, r, true);
  r.envelope_B = r.samples.envelope_B(sc.params);
  return r;
}

} // namespace maflow

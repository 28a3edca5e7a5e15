#include "maflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "maflow/toml.hpp"

namespace maflow {

double SmoothTerm::value_r2(double r2) const {
  switch (kind) {
    case Kind::Constant: return coef;
    case Kind::Quadratic: return coef * r2;
    case Kind::LogShift: return coef * std::log(offset + r2);
  }
  return 0.0;
}

double SmoothTerm::d_r2(double r2) const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Quadratic: return coef;
    case Kind::LogShift: return coef / (offset + r2);
  }
  return 0.0;
}

double SmoothTerm::d2_r2(double r2) const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Quadratic: return 0.0;
    case Kind::LogShift: return -coef / ((offset + r2) * (offset + r2));
  }
  return 0.0;
}

double SmoothPart::value_r2(double r2) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.value_r2(r2);
  return v;
}

double SmoothPart::value_s(double s) const { return value_r2(std::exp(2.0 * s)); }

double SmoothPart::d1_s(double s) const {
  const double r2 = std::exp(2.0 * s);
  double d = 0.0;
  for (const auto& t : terms) d += t.d_r2(r2);
  return 2.0 * r2 * d; // d/ds = 2 r^2 d/dr^2
}

double SmoothPart::d2_s(double s) const {
  const double r2 = std::exp(2.0 * s);
  double d1 = 0.0, d2 = 0.0;
  for (const auto& t : terms) {
    d1 += t.d_r2(r2);
    d2 += t.d2_r2(r2);
  }
  return 4.0 * r2 * r2 * d2 + 4.0 * r2 * d1;
}

double TimePoly::value(double t) const {
  double v = 0.0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * t + *it;
  return v;
}

double TimePoly::d1(double t) const {
  double v = 0.0;
  for (size_t k = coef.size(); k-- > 1;) v = v * t + double(k) * coef[k];
  return v;
}

bool TimePoly::is_zero() const {
  return std::all_of(coef.begin(), coef.end(), [](double c) { return c == 0.0; });
}

double SourceTerm::value(double r2, double t) const {
  const double p = poly.coef.empty() ? 1.0 : poly.value(t);
  return space.value_r2(r2) * p;
}

double SourceTerm::dt(double r2, double t) const {
  if (poly.coef.empty()) return 0.0;
  return space.value_r2(r2) * poly.d1(t);
}

double SourceFn::value(double r2, double t) const {
  double v = 0.0;
  for (const auto& term : terms) v += term.value(r2, t);
  return v;
}

double SourceFn::dt(double r2, double t) const {
  double v = 0.0;
  for (const auto& term : terms) v += term.dt(r2, t);
  return v;
}

bool SourceFn::is_zero() const {
  for (const auto& term : terms) {
    if (term.space.coef != 0.0 && !(term.poly.coef.size() && term.poly.is_zero()))
      return false;
  }
  return true;
}

double FlowScenario::u0_at(double x, double y) const {
  double v = smooth.value_r2(x * x + y * y);
  for (const auto& a : atoms) {
    const double dx = x - a.x, dy = y - a.y;
    v += a.mass * 0.5 * std::log(dx * dx + dy * dy);
  }
  return v;
}

double FlowScenario::u0_radial_s(double s) const {
  double v = smooth.value_s(s);
  for (const auto& a : atoms) v += a.mass * s; // radial scenarios center atoms
  return v;
}

double FlowScenario::phi_at(double x, double y, double t) const {
  return u0_at(x, y) + boundary_poly.value(t);
}

double FlowScenario::phi_dot_at(double, double, double t) const {
  return boundary_poly.d1(t);
}

double FlowScenario::f_at(double x, double y, double t) const {
  return source.value(x * x + y * y, t);
}

double FlowScenario::f_dot_at(double x, double y, double t) const {
  return source.dt(x * x + y * y, t);
}

bool FlowScenario::is_radial() const {
  if (atoms.empty()) return true;
  if (atoms.size() > 1) return false;
  return atoms[0].x == 0.0 && atoms[0].y == 0.0;
}

void FlowScenario::validate() const {
  FlowParams check(params.n, params.A, params.T); // re-runs the invariants
  (void)check;
  if (!(domain_radius > 0.0))
    throw std::invalid_argument("scenario: domain radius must be > 0");
  for (const auto& a : atoms) {
    if (!(a.mass > 0.0))
      throw std::invalid_argument("scenario: atom mass must be > 0");
    const double r = std::hypot(a.x, a.y);
    if (!(r < domain_radius * (1.0 - 1e-9)))
      throw std::invalid_argument("scenario: atom must lie strictly inside the domain");
  }
  for (const auto& tm : smooth.terms) {
    if (tm.kind == SmoothTerm::Kind::LogShift && !(tm.offset > 0.0))
      throw std::invalid_argument("scenario: log term offset must be > 0");
  }
  if (!boundary_poly.coef.empty() && boundary_poly.coef[0] != 0.0)
    throw std::invalid_argument(
        "scenario: boundary polynomial must vanish at t = 0 (u0 = phi(.,0))");
  if (output_times.empty())
    throw std::invalid_argument("scenario: no output times");
  double prev = 0.0;
  for (double t : output_times) {
    if (!(t > prev))
      throw std::invalid_argument("scenario: output times must be strictly increasing");
    if (t > params.T + 1e-12)
      throw std::invalid_argument("scenario: output time beyond the horizon T");
    prev = t;
  }
  if (ladder.rungs < 0)
    throw std::invalid_argument("scenario: rungs must be >= 0");
  if (!atoms.empty() && ladder.rungs == 0)
    throw std::invalid_argument("scenario: atom data require a regularization ladder");
  if (mesh.radial_points < 100)
    throw std::invalid_argument("scenario: radial mesh needs at least 100 points");
  if (mesh.planar_cells < 16)
    throw std::invalid_argument("scenario: planar mesh needs at least 16 cells");
  if (params.n >= 2 && !is_radial())
    throw std::invalid_argument(
        "scenario: n >= 2 supports only radial data (single centered atom)");
  if (mesh.solver == SolverKind::Radial && !is_radial())
    throw std::invalid_argument("scenario: radial solver requires radial data");
  if (mesh.solver == SolverKind::Planar && params.n != 1)
    throw std::invalid_argument("scenario: planar solver requires n = 1");
}

namespace {

void fmt(std::string& out, const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  out += buf;
}

const char* kind_name(SmoothTerm::Kind k) {
  switch (k) {
    case SmoothTerm::Kind::Constant: return "const";
    case SmoothTerm::Kind::Quadratic: return "quad";
    case SmoothTerm::Kind::LogShift: return "logshift";
  }
  return "?";
}

void canon_term(std::string& s, const SmoothTerm& t) {
  s += kind_name(t.kind);
  fmt(s, ":%.17g", t.coef);
  if (t.kind == SmoothTerm::Kind::LogShift) fmt(s, ":%.17g", t.offset);
}

} // namespace

std::string FlowScenario::canonical() const {
  std::string s = "maflow1;";
  s += "n=" + std::to_string(params.n) + ";";
  fmt(s, "A=%.17g;", params.A);
  fmt(s, "T=%.17g;", params.T);
  fmt(s, "R=%.17g;", domain_radius);
  s += "atoms=[";
  for (const auto& a : atoms) {
    fmt(s, "(%.17g,", a.x);
    fmt(s, "%.17g,", a.y);
    fmt(s, "%.17g)", a.mass);
  }
  s += "];smooth=[";
  for (const auto& t : smooth.terms) {
    canon_term(s, t);
    s += ";";
  }
  s += "];phi=trace+[";
  for (double c : boundary_poly.coef) fmt(s, "%.17g,", c);
  s += "];f=[";
  for (const auto& term : source.terms) {
    canon_term(s, term.space);
    s += "*[";
    for (double c : term.poly.coef) fmt(s, "%.17g,", c);
    s += "];";
  }
  s += "];mesh=";
  switch (mesh.solver) {
    case SolverKind::Auto: s += "auto"; break;
    case SolverKind::Radial: s += "radial"; break;
    case SolverKind::Planar: s += "planar"; break;
  }
  s += ":" + std::to_string(mesh.radial_points) + ":" +
       std::to_string(mesh.planar_cells) + ";";
  s += "rungs=" + std::to_string(ladder.rungs) + ";outputs=[";
  for (double t : output_times) fmt(s, "%.17g,", t);
  s += "];";
  return s;
}

std::uint64_t FlowScenario::hash() const {
  const std::string s = canonical();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

FlowScenario FlowScenario::rescaled_to_unit(double* scale_out) const {
  if (scale_out) *scale_out = domain_radius;
  if (domain_radius == 1.0) return *this;
  FlowScenario out = *this;
  const double R = domain_radius;
  const double R2 = R * R;
  const double log_r2 = std::log(R2);
  out.domain_radius = 1.0;
  double const_shift = 0.0;
  out.smooth.terms.clear();
  for (const auto& t : smooth.terms) {
    SmoothTerm nt = t;
    switch (t.kind) {
      case SmoothTerm::Kind::Constant: break;
      case SmoothTerm::Kind::Quadratic: nt.coef = t.coef * R2; break;
      case SmoothTerm::Kind::LogShift:
        nt.offset = t.offset / R2;
        const_shift += t.coef * log_r2;
        break;
    }
    out.smooth.terms.push_back(nt);
  }
  for (auto& a : out.atoms) {
    const_shift += a.mass * std::log(R);
    a.x /= R;
    a.y /= R;
  }
  if (const_shift != 0.0)
    out.smooth.terms.push_back({SmoothTerm::Kind::Constant, const_shift, 1.0});
  out.source.terms.clear();
  for (const auto& term : source.terms) {
    SourceTerm nt = term;
    if (term.space.kind == SmoothTerm::Kind::Quadratic) {
      nt.space.coef = term.space.coef * R2;
    } else if (term.space.kind == SmoothTerm::Kind::LogShift) {
      nt.space.offset = term.space.offset / R2;
      SourceTerm extra;
      extra.space = {SmoothTerm::Kind::Constant, term.space.coef * log_r2, 1.0};
      extra.poly = term.poly;
      out.source.terms.push_back(extra);
    }
    out.source.terms.push_back(nt);
  }
  return out;
}

namespace {

SmoothTerm parse_term(const toml::Table& t) {
  SmoothTerm out;
  const std::string kind = toml::get_string(t, "kind");
  if (kind == "constant") {
    out.kind = SmoothTerm::Kind::Constant;
  } else if (kind == "quadratic") {
    out.kind = SmoothTerm::Kind::Quadratic;
  } else if (kind == "logshift") {
    out.kind = SmoothTerm::Kind::LogShift;
    out.offset = toml::get_float(t, "offset");
  } else {
    throw std::runtime_error("unknown expression kind '" + kind +
                             "' (vocabulary: constant, quadratic, logshift)");
  }
  out.coef = toml::get_float(t, "coef");
  return out;
}

} // namespace

FlowScenario parse_scenario(const std::string& text, const std::string& name) {
  const toml::Table root = toml::parse(text);
  FlowScenario sc;
  sc.name = name;

  const toml::Value* pv = toml::find(root, "params");
  if (!pv) throw std::runtime_error("scenario: missing [params]");
  const auto& params = pv->as_table();
  sc.params = FlowParams(int(toml::get_int(params, "n")),
                         toml::get_float(params, "A"),
                         toml::get_float(params, "T"));

  if (const toml::Value* dv = toml::find(root, "domain")) {
    sc.domain_radius = toml::get_float_or(dv->as_table(), "radius", 1.0);
  }

  if (const toml::Value* iv = toml::find(root, "initial")) {
    const auto& initial = iv->as_table();
    if (const toml::Value* av = toml::find(initial, "atom")) {
      for (const auto& e : av->as_array()) {
        const auto& at = e.as_table();
        LelongAtom a;
        a.x = toml::get_float_or(at, "x", 0.0);
        a.y = toml::get_float_or(at, "y", 0.0);
        a.mass = toml::get_float(at, "mass");
        sc.atoms.push_back(a);
      }
    }
    if (const toml::Value* smv = toml::find(initial, "smooth")) {
      for (const auto& e : smv->as_array())
        sc.smooth.terms.push_back(parse_term(e.as_table()));
    }
  }

  if (const toml::Value* bv = toml::find(root, "boundary")) {
    sc.boundary_poly.coef =
        toml::get_float_array_or(bv->as_table(), "poly", {});
  }

  if (const toml::Value* sv = toml::find(root, "source")) {
    if (const toml::Value* tv = toml::find(sv->as_table(), "term")) {
      for (const auto& e : tv->as_array()) {
        const auto& tt = e.as_table();
        SourceTerm term;
        term.space = parse_term(tt);
        term.poly.coef = toml::get_float_array_or(tt, "poly", {});
        sc.source.terms.push_back(term);
      }
    }
  }

  if (const toml::Value* mv = toml::find(root, "mesh")) {
    const auto& mt = mv->as_table();
    const std::string solver = toml::get_string_or(mt, "solver", "auto");
    if (solver == "auto") sc.mesh.solver = SolverKind::Auto;
    else if (solver == "radial") sc.mesh.solver = SolverKind::Radial;
    else if (solver == "planar") sc.mesh.solver = SolverKind::Planar;
    else throw std::runtime_error("scenario: unknown solver '" + solver + "'");
    sc.mesh.radial_points = int(toml::get_int_or(mt, "radial_points", 640));
    sc.mesh.planar_cells = int(toml::get_int_or(mt, "planar_cells", 128));
  }

  if (const toml::Value* lv = toml::find(root, "ladder")) {
    sc.ladder.rungs = int(toml::get_int_or(lv->as_table(), "rungs", 8));
  }

  if (const toml::Value* ov = toml::find(root, "output")) {
    const auto& ot = ov->as_table();
    sc.output_times = toml::get_float_array_or(ot, "times", {});
    if (sc.output_times.empty()) {
      const double every = toml::get_float_or(ot, "every", 0.0);
      if (every > 0.0) {
        for (double t = every; t <= sc.params.T + 1e-12; t += every)
          sc.output_times.push_back(std::min(t, sc.params.T));
      }
    }
  }

  sc.validate();
  return sc;
}

FlowScenario load_scenario(const std::string& path) {
  std::string name = path;
  const size_t slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const size_t dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  std::string text;
  {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open scenario file: " + path);
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, fp)) > 0) text.append(buf, n);
    std::fclose(fp);
  }
  return parse_scenario(text, name);
}

} // namespace maflow

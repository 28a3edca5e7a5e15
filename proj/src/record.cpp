#include "maflow/record.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace maflow {

using nlohmann::json;

namespace {

json stats_json(const NewtonStats& s) {
  return json{{"steps", s.steps},
              {"total_iterations", s.total_iterations},
              {"max_iterations", s.max_iterations},
              {"worst_residual", s.worst_residual},
              {"dt_halvings", s.dt_halvings}};
}

NewtonStats stats_from(const json& j) {
  NewtonStats s;
  s.steps = j.at("steps").get<long long>();
  s.total_iterations = j.at("total_iterations").get<long long>();
  s.max_iterations = j.at("max_iterations").get<int>();
  s.worst_residual = j.at("worst_residual").get<double>();
  s.dt_halvings = j.at("dt_halvings").get<int>();
  return s;
}

} // namespace

std::string RunRecord::to_json() const {
  json j;
  j["scenario_name"] = scenario_name;
  j["scenario_hash"] = scenario_hash;
  j["solver"] = solver;
  j["rung_m"] = rung_m;
  j["atom_m"] = atom_m;
  j["eps_m"] = eps_m;
  j["sup_abs_g"] = sup_abs_g;
  j["delta_m"] = delta_m;
  j["sup_u0"] = sup_u0;
  j["envelope_B"] = envelope_B;
  j["mollify_delta"] = mollify_delta;
  j["envelope_time_samples"] = envelope_time_samples;
  j["n"] = n;
  j["radial_points"] = radial_points;
  j["s_min"] = s_min;
  j["planar_cells"] = planar_cells;
  j["h"] = h;
  j["u0"] = u0;
  j["g"] = g;
  j["stats"] = stats_json(stats);
  json snaps = json::array();
  for (const auto& s : snapshots) {
    snaps.push_back(json{
        {"t", s.t}, {"dt_used", s.dt_used}, {"u", s.u}, {"udot", s.udot}});
  }
  j["snapshots"] = std::move(snaps);
  return j.dump();
}

RunRecord RunRecord::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunRecord r;
  r.scenario_name = j.at("scenario_name").get<std::string>();
  r.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
  r.solver = j.at("solver").get<std::string>();
  r.rung_m = j.at("rung_m").get<int>();
  r.atom_m = j.at("atom_m").get<int>();
  r.eps_m = j.at("eps_m").get<double>();
  r.sup_abs_g = j.at("sup_abs_g").get<double>();
  r.delta_m = j.at("delta_m").get<double>();
  r.sup_u0 = j.at("sup_u0").get<double>();
  r.envelope_B = j.at("envelope_B").get<double>();
  r.mollify_delta = j.at("mollify_delta").get<double>();
  r.envelope_time_samples = j.at("envelope_time_samples").get<int>();
  r.n = j.at("n").get<int>();
  r.radial_points = j.at("radial_points").get<int>();
  r.s_min = j.at("s_min").get<double>();
  r.planar_cells = j.at("planar_cells").get<int>();
  r.h = j.at("h").get<double>();
  r.u0 = j.at("u0").get<std::vector<double>>();
  r.g = j.at("g").get<std::vector<double>>();
  r.stats = stats_from(j.at("stats"));
  for (const auto& sj : j.at("snapshots")) {
    Snapshot s;
    s.t = sj.at("t").get<double>();
    s.dt_used = sj.at("dt_used").get<double>();
    s.u = sj.at("u").get<std::vector<double>>();
    s.udot = sj.at("udot").get<std::vector<double>>();
    r.snapshots.push_back(std::move(s));
  }
  r.validate();
  return r;
}

void RunRecord::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json();
}

RunRecord RunRecord::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void RunRecord::validate() const {
  double prev = 0.0;
  for (const auto& s : snapshots) {
    if (!(s.t > prev))
      throw std::runtime_error("RunRecord: snapshot times not strictly increasing");
    prev = s.t;
    for (double v : s.u)
      if (!std::isfinite(v)) throw std::runtime_error("RunRecord: non-finite value");
    for (double v : s.udot)
      if (!std::isfinite(v)) throw std::runtime_error("RunRecord: non-finite udot");
  }
}

} // namespace maflow

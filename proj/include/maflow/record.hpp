// Time-indexed run output: snapshots, solver statistics and the rung
// metadata needed to re-evaluate every diagnostic from disk.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maflow {

struct NewtonStats {
  long long steps = 0;
  long long total_iterations = 0;
  int max_iterations = 0;
  double worst_residual = 0.0;
  int dt_halvings = 0;
};

struct Snapshot {
  double t = 0.0;
  double dt_used = 0.0;
  std::vector<double> u;
  std::vector<double> udot; // backward difference actually used by the scheme
};

struct RunRecord {
  std::string scenario_name;
  std::uint64_t scenario_hash = 0;
  std::string solver; // "radial" | "planar"

  // rung metadata
  int rung_m = 0;
  int atom_m = 0;
  double eps_m = 0.0;
  double sup_abs_g = 0.0;
  double delta_m = 0.0;
  double sup_u0 = 0.0;
  double envelope_B = 0.0;
  double mollify_delta = 0.0;
  int envelope_time_samples = 0;

  // mesh metadata (radial: points/s_min/h; planar: cells/h)
  int n = 1;
  int radial_points = 0;
  double s_min = 0.0;
  int planar_cells = 0;
  double h = 0.0;

  std::vector<double> u0; // regularized initial profile
  std::vector<double> g;  // initial source sample g_m

  std::vector<Snapshot> snapshots;
  NewtonStats stats;

  bool is_radial() const { return solver == "radial"; }

  std::string to_json() const;
  static RunRecord from_json(const std::string& text);
  void save(const std::string& path) const;
  static RunRecord load(const std::string& path);

  // Invariants of the serialized form: strictly increasing snapshot times,
  // finite values.
  void validate() const;
};

} // namespace maflow

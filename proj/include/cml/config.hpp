#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cml/grid_density.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"
#include "cml/stats.hpp"

namespace cml {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t seed = 1;
  long long steps = 100000;
  long long burn_in = 1000;
  double dither = 0.0;
  int replicas = 1;
};

struct SimulateOptions {
  bool record_collisions = false;
};

struct UlamOptions {
  int n_cells = 20;
  int sites = 1;  // 1 = single-site operator, 2 or 3 = coupled
  std::string arrangement = "torus";
  double tol = 1e-10;
  int max_iter = 100000;
  int starts = 1;  // extra random power-iteration starts to cross-check
};

struct VerifyLyOptions {
  int n_cells = 20;
  int samples = 200;
  int sites = 2;
  std::string arrangement = "torus";
  std::vector<double> epsilons;  // empty: only coupling.epsilon
};

struct DecoupleOptions {
  int n_cells = 20;
  int samples = 20;
  int sites = 2;
  std::string arrangement = "torus";
  int site = 0;
  std::vector<double> epsilons;  // sweep for the scaling slope
};

struct CorrelationOptions {
  std::string mode = "time";  // "time" or "space_time"
  Observable phi;
  Observable psi;
  int max_lag = 5;
  std::vector<int> offsets = {0};
};

struct ExperimentConfig {
  std::string map_name = "decimal";  // preset name or "custom"
  PiecewiseAffineMap map;
  LatticeGeometry geometry;
  double epsilon = 0.0;
  bool default_placement = true;
  std::vector<double> placement_lo;  // 2d window starts when explicit
  RunConfig run;
  SimulateOptions simulate;
  UlamOptions ulam;
  VerifyLyOptions verify_ly;
  DecoupleOptions verify_decouple;
  CorrelationOptions correlations;
};

// Parses and fully validates a JSON config document. Unknown keys anywhere
// are hard errors; diagnostics name the offending key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Collision windows for the configured placement at the given length.
CollisionSpec coupling_spec(const ExperimentConfig& cfg, double epsilon);
inline CollisionSpec coupling_spec(const ExperimentConfig& cfg) {
  return coupling_spec(cfg, cfg.epsilon);
}

SmallGeometry small_geometry(int sites, const std::string& arrangement);

// Canonical JSON echo of the fully resolved config; parseable by
// parse_config and byte-stable for identical inputs.
std::string resolved_config_json(const ExperimentConfig& cfg);

// Random signed density on the n_cells^k grid, coefficients iid uniform in
// [-1, 1]; sample index maps to its own derived seed.
GridDensity random_density(int k, int n_cells, std::uint64_t seed, int index);

}  // namespace cml

#pragma once

#include <string>

#include "cml/grid_density.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"

namespace cml {

// Exact density of F0_* mu: the single-site transfer operator applied in each
// coordinate. Requires is_markov_for_grid(map, n_cells) so the result is
// again grid-constant.
GridDensity pushforward_f0(const GridDensity& mu,
                           const PiecewiseAffineMap& map);

// Exact density of Phi_* mu on 2 or 3 sites (path or torus adjacency).
// All window endpoints must lie on the grid, so Phi maps cells to cells.
// With decouple_at >= 0, swaps touching that site are suppressed.
GridDensity pushforward_phi(const GridDensity& mu, const CollisionSpec& spec,
                            const SmallGeometry& geom, int decouple_at = -1);

struct LYReport {
  double sigma = 0.0;
  double B_empirical = 0.0;
  bool pass = false;
  int violating_index = -1;
  std::string message;
};

// Checks |F_eps* mu| <= |mu| exactly (1e-12 slack) on every sample member and
// reports the smallest B making
//   bv(F_eps* mu) <= sigma * bv(mu) + B / gap * tv(mu)
// hold across the sample, sigma = (4+4d)/lambda with d = 1 here.
LYReport verify_lasota_yorke(const PiecewiseAffineMap& map,
                             const CollisionSpec& spec,
                             const SmallGeometry& geom,
                             const std::vector<GridDensity>& sample);

struct DecoupleReport {
  double bound_factor = 0.0;  // 4 * d * epsilon
  double worst_ratio = 0.0;
  bool pass = false;
  int violating_index = -1;
  std::string message;
};

// Checks tv(Phi_* mu - Phi_{i,*} mu) <= 4 d eps bv(mu) per sample member.
DecoupleReport verify_decoupling(const CollisionSpec& spec,
                                 const SmallGeometry& geom, int site,
                                 const std::vector<GridDensity>& sample);

}  // namespace cml

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cml/grid_density.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"

namespace cml {

// Row-stochastic discretized transfer operator on the n_cells^k product grid.
// Row j lists (column, weight) pairs; densities evolve as row vectors.
struct UlamMatrix {
  int dimension = 0;
  int k = 1;
  int n_cells = 0;
  SparseRows rows;
};

UlamMatrix build_ulam_single(const PiecewiseAffineMap& map, int n_cells);

// Coupled operator on 2 or 3 sites: tensor power of the single-site matrix
// composed with the swap's cell permutation (map phase first, then swaps).
// Window endpoints must lie on the grid and the map must be Markov for it.
UlamMatrix build_ulam_coupled(const PiecewiseAffineMap& map,
                              const CollisionSpec& spec,
                              const SmallGeometry& geom, int n_cells);

// Cell target table of the swap phase: cell index -> cell index.
std::vector<int> phi_cell_map(const CollisionSpec& spec,
                              const SmallGeometry& geom, int n_cells,
                              int decouple_at = -1);

struct SpectralReport {
  GridDensity stationary;
  double leading_eigenvalue = 0.0;
  double second_modulus = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool mixing = false;
  double residual = 0.0;
  std::string message;
};

// Power iteration for the stationary density (uniform start unless given),
// then deflated power iteration for the subdominant modulus.
SpectralReport stationary_density(const UlamMatrix& P, double tol = 1e-10,
                                  int max_iter = 100000,
                                  const std::vector<double>* start = nullptr);

// L1 distance between the report's stationary density and a histogram.
double compare_with_empirical(const SpectralReport& report,
                              const GridDensity& histogram);

// One "row col value" line per entry.
void write_matrix_coo(std::ostream& os, const UlamMatrix& P);

}  // namespace cml

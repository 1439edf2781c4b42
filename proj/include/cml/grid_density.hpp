#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cml/local_map.hpp"

namespace cml {

// Piecewise-constant signed density on [0,1]^k, uniform grid per axis,
// row-major storage with site 0 slowest.
struct GridDensity {
  int k = 1;
  int n_cells = 1;
  std::vector<double> c;
  bool probability = false;
};

GridDensity make_density(int k, int n_cells, std::vector<double> c,
                         bool probability = false);
GridDensity constant_density(int k, int n_cells, double value = 1.0);

int cell_count(const GridDensity& mu);
double cell_volume(const GridDensity& mu);
double integral(const GridDensity& mu);

struct NormReport {
  double tv = 0.0;
  double bv = 0.0;
  std::vector<double> per_direction_variation;
};

// Total-variation norm of the measure: integral of |h|.
double tv_norm(const GridDensity& mu);

// Variation of h extended by zero outside the cube: per direction, sum over
// grid lines of |first| + interior |jumps| + |last|, scaled by the transverse
// cell volume; bv is the max over directions.
NormReport bv_norm(const GridDensity& mu);

// Integrate out all coordinates not in keep_sites (ascending site order kept).
GridDensity marginal(const GridDensity& mu, const std::vector<int>& keep_sites);

// Split every cell into `factor` equal cells per axis (same function).
GridDensity refine(const GridDensity& mu, int factor);

// Exact one-dimensional transfer matrix of an affine piecewise map on the
// n-cell grid: row j lists (column, weight) with weight = n * measure of
// {x in cell_j : T(x) in cell_col}; rows are stochastic.
using SparseRows = std::vector<std::vector<std::pair<int, double>>>;
SparseRows transfer_rows_1d(const PiecewiseAffineMap& map, int n_cells);

// Apply the 1d transfer matrix along one axis of a k-dim density.
GridDensity apply_transfer_axis(const GridDensity& mu, const SparseRows& rows,
                                int axis);

// Two or three sites in a row, open chain or periodic wrap.
struct SmallGeometry {
  int k = 2;
  enum class Arrangement { path, torus } arrangement = Arrangement::torus;
};

// Ordered adjacency (s, t): s swaps with t when x_s is in the plus window
// and x_t in the minus window.
std::vector<std::pair<int, int>> ordered_pairs(const SmallGeometry& geom);

// Columnar text format: header "k n_cells", one coefficient per line.
void write_density(std::ostream& os, const GridDensity& mu);
GridDensity read_density(std::istream& is);
GridDensity load_density(const std::string& path);
void save_density(const std::string& path, const GridDensity& mu);

}  // namespace cml

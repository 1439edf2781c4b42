#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cml {

struct Branch {
  double lo = 0.0;        // domain [lo, hi)
  double hi = 1.0;
  double slope = 2.0;     // |slope| >= lambda_min > 1
  double intercept = 0.0; // x -> slope*x + intercept
};

struct PiecewiseAffineMap {
  std::vector<Branch> branches; // ordered, disjoint, covering [0,1)
  double lambda_min = 0.0;      // min |slope|, validated > 1
};

// Validates branch cover, expansion and image containment; computes lambda_min.
// Throws std::invalid_argument on violation.
PiecewiseAffineMap make_map(std::vector<Branch> branches);

PiecewiseAffineMap doubling_map();                 // 2x mod 1
PiecewiseAffineMap decimal_map();                  // 10x mod 1
PiecewiseAffineMap preset_map(const std::string& name);

// T(x) via the unique branch containing x; x = 1 uses the last branch.
// Throws std::domain_error for x outside [0,1].
double eval(const PiecewiseAffineMap& map, double x);

// All x with eval(x) = y, each with 1/|slope| of its branch, ordered by x.
std::vector<std::pair<double, double>> preimages(const PiecewiseAffineMap& map,
                                                 double y);

// True iff the transfer operator maps densities that are constant on the
// uniform n_cells grid to densities of the same form, exactly: all branch
// domain and image endpoints lie on the grid, and every branch spanning two
// or more cells has an integer slope (a branch inside a single cell imposes
// no slope constraint, its image endpoints being on the grid is enough).
bool is_markov_for_grid(const PiecewiseAffineMap& map, int n_cells);

}  // namespace cml

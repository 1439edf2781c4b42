#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cml/grid_density.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"

namespace cml {

// Local observable: a scalar function applied to the product of the state
// values over its support sites. Centered and bump kinds have sup norm <= 1.
struct Observable {
  enum class Kind { coordinate, centered_coordinate, smooth_bump };
  Kind kind = Kind::centered_coordinate;
  std::vector<int> support = {0};
  double center = 0.5;  // smooth_bump parameters
  double width = 0.25;
};

double observe(const Observable& obs, const LatticeState& x);
// as above with every support site shifted along axis 0 by `shift`
double observe_shifted(const Observable& obs, const LatticeState& x,
                       const LatticeGeometry& geom, int shift);

// Everything needed to regenerate a trajectory ensemble deterministically.
struct TrajectorySource {
  PiecewiseAffineMap map;
  LatticeGeometry geometry;
  CollisionSpec coupling;
  std::uint64_t seed = 1;
  long long steps = 100000;
  long long burn_in = 1000;
  double dither = 0.0;  // amplitude of the seeded mod-1 regularization
  int replicas = 1;
};

struct CorrelationSeries {
  std::vector<int> lags;
  std::vector<double> values;
  std::vector<double> std_err;
  long long n_samples = 0;
};

// C(n) = <phi(x_t) psi(x_{t+n})> - <phi><psi>, averaged over time and over
// all lattice translations of the observable pair (the dynamics commutes
// with translations, so every base site is one more sample). Batch-means
// standard errors; replicas merged by sample weight.
CorrelationSeries time_correlation(const TrajectorySource& source,
                                   const Observable& phi,
                                   const Observable& psi, int max_lag);

// Same estimator with psi shifted j sites along axis 0 for every offset j.
// The offset-0 series coincides with time_correlation: same samples.
std::vector<CorrelationSeries> space_time_correlation(
    const TrajectorySource& source, const Observable& phi,
    const Observable& psi, int max_lag, const std::vector<int>& offsets);

struct ExpFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double noise_floor = 0.0;  // first lag at or below the 3 stderr floor
  bool ok = false;
  std::string error;
};

// Least-squares line on (n, log|C(n)|) over lags with |C(n)| > 3 stderr;
// needs at least 4 such lags, otherwise reports "insufficient decay range".
ExpFit fit_exponential(const CorrelationSeries& series);

struct CollisionRate {
  double rate = 0.0;     // per ordered adjacent pair per step
  double std_err = 0.0;  // binomial
  long long events = 0;
  long long trials = 0;
};

// Frequency over the trailing `window` steps of each replica.
CollisionRate collision_rate(const TrajectorySource& source, long long window);

// Occupation histogram of (x_{s1},...,x_{sk}) on the n_cells^k product grid.
GridDensity marginal_histogram(const TrajectorySource& source,
                               const std::vector<int>& sites, int n_cells);

}  // namespace cml

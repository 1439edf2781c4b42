#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cml/local_map.hpp"

namespace cml {

struct LatticeGeometry {
  int d = 1;
  std::vector<int> sides;   // d entries, each >= 3
  // boundary is always periodic
};

LatticeGeometry make_geometry(int d, std::vector<int> sides);

int n_sites(const LatticeGeometry& g);

// Flat index of the site reached from flat index i by +/-1 along axis.
int neighbor(const LatticeGeometry& g, int i, int axis, int sign);

struct Interval {
  double lo = 0.0, hi = 0.0;  // open interval (lo, hi)
};

inline bool in_interval(const Interval& a, double x) {
  return x > a.lo && x < a.hi;
}

// Collision intervals A_v, indexed by direction: entry 2*axis is the
// +e_axis interval, entry 2*axis+1 the -e_axis interval.
struct CollisionSpec {
  double epsilon = 0.0;
  std::vector<Interval> intervals;  // 2d entries; empty means no coupling
  double gap = 0.0;                 // minimal distance between intervals
};

// Default placement: d=1 uses (0.2, 0.2+eps) and (0.7, 0.7+eps); for d >= 2
// the 2d intervals start at 0.1 + j*0.8/(2d). epsilon = 0 gives the empty
// spec (identity coupling).
CollisionSpec default_collision_spec(int d, double epsilon);
CollisionSpec make_collision_spec(double epsilon, std::vector<Interval> intervals);

using LatticeState = std::vector<double>;

struct CollisionPair {
  int site = 0;   // canonical: partner = site + e_axis
  int axis = 0;
};

using CollisionPairList = std::vector<CollisionPair>;

LatticeState uncoupled_step(const LatticeState& x, const PiecewiseAffineMap& map);

CollisionPairList detect_collision_pairs(const LatticeState& x,
                                         const CollisionSpec& spec,
                                         const LatticeGeometry& geom);

LatticeState coupling_apply(const LatticeState& x, const CollisionSpec& spec,
                            const LatticeGeometry& geom);

// Phi with site `decouple_at` never participating in any collision.
LatticeState decoupled_coupling_apply(const LatticeState& x,
                                      const CollisionSpec& spec,
                                      const LatticeGeometry& geom,
                                      int decouple_at);

LatticeState step(const LatticeState& x, const PiecewiseAffineMap& map,
                  const CollisionSpec& spec, const LatticeGeometry& geom);

// Observer gets (time index of the completed step, state after the step,
// collision pairs applied in that step).
using Observer =
    std::function<void(int, const LatticeState&, const CollisionPairList&)>;

struct TrajectorySummary {
  std::vector<int> collisions_per_step;
  LatticeState final_state;
};

// Iterates step() n_steps times. dither > 0 adds a seeded per-site
// perturbation of that amplitude inside the map phase, wrapped mod 1; it
// keeps binary-double orbits of integer-slope branches off their dyadic
// absorbing points. dither = 0 reproduces the exact composition.
TrajectorySummary run_trajectory(const LatticeState& initial,
                                 const PiecewiseAffineMap& map,
                                 const CollisionSpec& spec,
                                 const LatticeGeometry& geom, int n_steps,
                                 const std::vector<Observer>& observers = {},
                                 double dither = 0.0,
                                 std::uint64_t dither_seed = 0);

namespace serial {
LatticeState uncoupled_step(const LatticeState& x, const PiecewiseAffineMap& map);
LatticeState step(const LatticeState& x, const PiecewiseAffineMap& map,
                  const CollisionSpec& spec, const LatticeGeometry& geom);
}  // namespace serial

// In-place kernels shared by run_trajectory and the stats estimators.
void step_inplace(LatticeState& x, LatticeState& scratch,
                  const PiecewiseAffineMap& map, const CollisionSpec& spec,
                  const LatticeGeometry& geom, CollisionPairList& pairs,
                  double dither, std::uint64_t dither_seed, std::uint64_t t);
namespace serial {
void step_inplace(LatticeState& x, LatticeState& scratch,
                  const PiecewiseAffineMap& map, const CollisionSpec& spec,
                  const LatticeGeometry& geom, CollisionPairList& pairs,
                  double dither, std::uint64_t dither_seed, std::uint64_t t);
}  // namespace serial

}  // namespace cml

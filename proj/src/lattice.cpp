#include "cml/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cml/rng.hpp"

namespace cml {

LatticeGeometry make_geometry(int d, std::vector<int> sides) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (static_cast<int>(sides.size()) != d)
    throw std::invalid_argument("need one side length per dimension");
  for (int s : sides)
    if (s < 3) throw std::invalid_argument("side lengths must be >= 3");
  return {d, std::move(sides)};
}

int n_sites(const LatticeGeometry& g) {
  int n = 1;
  for (int s : g.sides) n *= s;
  return n;
}

int neighbor(const LatticeGeometry& g, int i, int axis, int sign) {
  if (g.d == 1) {
    int n = g.sides[0];
    return sign > 0 ? (i + 1 == n ? 0 : i + 1) : (i == 0 ? n - 1 : i - 1);
  }
  // row-major, axis 0 slowest
  int stride = 1;
  for (int a = g.d - 1; a > axis; --a) stride *= g.sides[a];
  int side = g.sides[axis];
  int coord = (i / stride) % side;
  int moved = coord + (sign > 0 ? 1 : -1);
  if (moved == side) moved = 0;
  if (moved < 0) moved = side - 1;
  return i + (moved - coord) * stride;
}

CollisionSpec make_collision_spec(double epsilon,
                                  std::vector<Interval> intervals) {
  if (epsilon == 0.0 && intervals.empty()) return {0.0, {}, 1.0};
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  for (const Interval& a : intervals) {
    if (std::abs((a.hi - a.lo) - epsilon) > 1e-15)
      throw std::invalid_argument("interval length must equal epsilon");
    if (a.lo < 0.0 || a.hi > 1.0)
      throw std::invalid_argument("intervals must lie inside (0,1)");
  }
  std::vector<Interval> sorted = intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double gap = 1.0;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    double dist = sorted[i + 1].lo - sorted[i].hi;
    if (dist < 0.0) throw std::invalid_argument("intervals must be disjoint");
    gap = std::min(gap, dist);
  }
  if (gap <= 0.0) throw std::invalid_argument("interval gap must be positive");
  return {epsilon, std::move(intervals), gap};
}

CollisionSpec default_collision_spec(int d, double epsilon) {
  if (epsilon == 0.0) return {0.0, {}, 1.0};
  std::vector<Interval> iv;
  if (d == 1) {
    iv = {{0.2, 0.2 + epsilon}, {0.7, 0.7 + epsilon}};
  } else {
    for (int j = 0; j < 2 * d; ++j) {
      double lo = 0.1 + j * 0.8 / (2 * d);
      iv.push_back({lo, lo + epsilon});
    }
  }
  return make_collision_spec(epsilon, std::move(iv));
}

namespace {

// Branch lookup agreeing exactly with the half-open convention.
inline int branch_index(const PiecewiseAffineMap& m, double x) {
  const auto& bs = m.branches;
  int n = static_cast<int>(bs.size());
  int i = static_cast<int>(x * n);
  if (i >= n) i = n - 1;
  if (i < 0) i = 0;
  while (i > 0 && x < bs[i].lo) --i;
  while (i + 1 < n && x >= bs[i].hi) ++i;
  return i;
}

inline double eval_fast(const PiecewiseAffineMap& m, double x) {
  const Branch& b = m.branches[branch_index(m, x)];
  double y = b.slope * x + b.intercept;
  return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
}

inline double wrap_unit(double y) {
  y -= std::floor(y);
  return y < 1.0 ? y : 0.0;
}

void map_phase_serial(const LatticeState& x, LatticeState& y,
                      const PiecewiseAffineMap& map, double dither,
                      std::uint64_t seed, std::uint64_t t) {
  int n = static_cast<int>(x.size());
  if (dither > 0.0) {
    for (int i = 0; i < n; ++i)
      y[i] = wrap_unit(eval_fast(map, x[i]) +
                       (dither_value(seed, t, i) - 0.5) * dither);
  } else {
    for (int i = 0; i < n; ++i) y[i] = eval_fast(map, x[i]);
  }
}

void map_phase_parallel(const LatticeState& x, LatticeState& y,
                        const PiecewiseAffineMap& map, double dither,
                        std::uint64_t seed, std::uint64_t t) {
  int n = static_cast<int>(x.size());
  if (dither > 0.0) {
#pragma omp parallel for schedule(static) if (n >= 4096)
    for (int i = 0; i < n; ++i)
      y[i] = wrap_unit(eval_fast(map, x[i]) +
                       (dither_value(seed, t, i) - 0.5) * dither);
  } else {
#pragma omp parallel for schedule(static) if (n >= 4096)
    for (int i = 0; i < n; ++i) y[i] = eval_fast(map, x[i]);
  }
}

void detect_into(const LatticeState& x, const CollisionSpec& spec,
                 const LatticeGeometry& geom, CollisionPairList& pairs) {
  pairs.clear();
  if (spec.intervals.empty()) return;
  int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < geom.d; ++a) {
      const Interval& plus = spec.intervals[2 * a];
      if (!in_interval(plus, x[i])) continue;
      const Interval& minus = spec.intervals[2 * a + 1];
      int j = neighbor(geom, i, a, +1);
      if (in_interval(minus, x[j])) pairs.push_back({i, a});
    }
  }
}

void apply_swaps(LatticeState& x, const LatticeGeometry& geom,
                 const CollisionPairList& pairs) {
  for (const CollisionPair& p : pairs) {
    int j = neighbor(geom, p.site, p.axis, +1);
    std::swap(x[p.site], x[j]);
  }
}

}  // namespace

LatticeState uncoupled_step(const LatticeState& x,
                            const PiecewiseAffineMap& map) {
  LatticeState y(x.size());
  map_phase_parallel(x, y, map, 0.0, 0, 0);
  return y;
}

namespace serial {
LatticeState uncoupled_step(const LatticeState& x,
                            const PiecewiseAffineMap& map) {
  LatticeState y(x.size());
  map_phase_serial(x, y, map, 0.0, 0, 0);
  return y;
}
}  // namespace serial

CollisionPairList detect_collision_pairs(const LatticeState& x,
                                         const CollisionSpec& spec,
                                         const LatticeGeometry& geom) {
  CollisionPairList pairs;
  detect_into(x, spec, geom, pairs);
  return pairs;
}

LatticeState coupling_apply(const LatticeState& x, const CollisionSpec& spec,
                            const LatticeGeometry& geom) {
  LatticeState y = x;
  CollisionPairList pairs;
  detect_into(x, spec, geom, pairs);
  apply_swaps(y, geom, pairs);
  return y;
}

LatticeState decoupled_coupling_apply(const LatticeState& x,
                                      const CollisionSpec& spec,
                                      const LatticeGeometry& geom,
                                      int decouple_at) {
  if (decouple_at < 0 || decouple_at >= static_cast<int>(x.size()))
    throw std::invalid_argument("decouple site outside lattice");
  LatticeState y = x;
  CollisionPairList pairs;
  detect_into(x, spec, geom, pairs);
  CollisionPairList kept;
  for (const CollisionPair& p : pairs) {
    int j = neighbor(geom, p.site, p.axis, +1);
    if (p.site != decouple_at && j != decouple_at) kept.push_back(p);
  }
  apply_swaps(y, geom, kept);
  return y;
}

void step_inplace(LatticeState& x, LatticeState& scratch,
                  const PiecewiseAffineMap& map, const CollisionSpec& spec,
                  const LatticeGeometry& geom, CollisionPairList& pairs,
                  double dither, std::uint64_t dither_seed, std::uint64_t t) {
  map_phase_parallel(x, scratch, map, dither, dither_seed, t);
  detect_into(scratch, spec, geom, pairs);
  apply_swaps(scratch, geom, pairs);
  x.swap(scratch);
}

namespace serial {
void step_inplace(LatticeState& x, LatticeState& scratch,
                  const PiecewiseAffineMap& map, const CollisionSpec& spec,
                  const LatticeGeometry& geom, CollisionPairList& pairs,
                  double dither, std::uint64_t dither_seed, std::uint64_t t) {
  map_phase_serial(x, scratch, map, dither, dither_seed, t);
  detect_into(scratch, spec, geom, pairs);
  apply_swaps(scratch, geom, pairs);
  x.swap(scratch);
}

LatticeState step(const LatticeState& x, const PiecewiseAffineMap& map,
                  const CollisionSpec& spec, const LatticeGeometry& geom) {
  LatticeState y = x, scratch(x.size());
  CollisionPairList pairs;
  serial::step_inplace(y, scratch, map, spec, geom, pairs, 0.0, 0, 0);
  return y;
}
}  // namespace serial

LatticeState step(const LatticeState& x, const PiecewiseAffineMap& map,
                  const CollisionSpec& spec, const LatticeGeometry& geom) {
  LatticeState y = x, scratch(x.size());
  CollisionPairList pairs;
  step_inplace(y, scratch, map, spec, geom, pairs, 0.0, 0, 0);
  return y;
}

TrajectorySummary run_trajectory(const LatticeState& initial,
                                 const PiecewiseAffineMap& map,
                                 const CollisionSpec& spec,
                                 const LatticeGeometry& geom, int n_steps,
                                 const std::vector<Observer>& observers,
                                 double dither, std::uint64_t dither_seed) {
  if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
  if (static_cast<int>(initial.size()) != n_sites(geom))
    throw std::invalid_argument("state size does not match geometry");
  TrajectorySummary out;
  out.collisions_per_step.reserve(n_steps);
  LatticeState x = initial, scratch(initial.size());
  CollisionPairList pairs;
  for (int t = 0; t < n_steps; ++t) {
    step_inplace(x, scratch, map, spec, geom, pairs, dither, dither_seed, t);
    out.collisions_per_step.push_back(static_cast<int>(pairs.size()));
    for (const Observer& obs : observers) {
      try {
        obs(t, x, pairs);
      } catch (const std::exception& e) {
        throw std::runtime_error("observer failed at step " +
                                 std::to_string(t) + ": " + e.what());
      }
    }
  }
  out.final_state = std::move(x);
  return out;
}

}  // namespace cml

#include "cml/measure_bv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cml {

namespace {

int grid_index(double e, int n, const char* what) {
  double scaled = e * n;
  double r = std::round(scaled);
  if (std::abs(scaled - r) > 1e-9)
    throw std::invalid_argument(std::string(what) +
                                " endpoint not on the cell grid");
  return static_cast<int>(r);
}

}  // namespace

GridDensity pushforward_f0(const GridDensity& mu,
                           const PiecewiseAffineMap& map) {
  if (!is_markov_for_grid(map, mu.n_cells))
    throw std::invalid_argument(
        "map is not Markov for this grid; push-forward would not be exact");
  SparseRows rows = transfer_rows_1d(map, mu.n_cells);
  GridDensity out = mu;
  for (int a = 0; a < mu.k; ++a) out = apply_transfer_axis(out, rows, a);
  out.probability = mu.probability;
  return out;
}

GridDensity pushforward_phi(const GridDensity& mu, const CollisionSpec& spec,
                            const SmallGeometry& geom, int decouple_at) {
  if (mu.k < 2 || mu.k > 3)
    throw std::invalid_argument("coupling push-forward needs 2 or 3 sites");
  if (geom.k != mu.k)
    throw std::invalid_argument("geometry and density site counts differ");
  if (spec.intervals.empty()) return mu;
  if (spec.intervals.size() != 2)
    throw std::invalid_argument("one-dimensional chain expects two windows");
  int n = mu.n_cells;
  int plo = grid_index(spec.intervals[0].lo, n, "plus window");
  int phi_ = grid_index(spec.intervals[0].hi, n, "plus window");
  int mlo = grid_index(spec.intervals[1].lo, n, "minus window");
  int mhi = grid_index(spec.intervals[1].hi, n, "minus window");
  std::vector<char> in_plus(n, 0), in_minus(n, 0);
  for (int m = 0; m < n; ++m) {
    in_plus[m] = (m >= plo && m < phi_);
    in_minus[m] = (m >= mlo && m < mhi);
  }
  auto pairs = ordered_pairs(geom);
  GridDensity out{mu.k, n, std::vector<double>(mu.c.size(), 0.0),
                  mu.probability};
  int k = mu.k;
  long long total = static_cast<long long>(mu.c.size());
  std::vector<long long> stride(k, 1);
  for (int a = k - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
  std::vector<int> m(k);
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int a = 0; a < k; ++a) {
      m[a] = static_cast<int>(rest / stride[a]);
      rest %= stride[a];
    }
    long long target = idx;
    for (const auto& [s, t] : pairs) {
      if (s == decouple_at || t == decouple_at) continue;
      if (in_plus[m[s]] && in_minus[m[t]]) {
        target = idx + (m[t] - m[s]) * stride[s] + (m[s] - m[t]) * stride[t];
        break;
      }
    }
    out.c[target] += mu.c[idx];
  }
  return out;
}

LYReport verify_lasota_yorke(const PiecewiseAffineMap& map,
                             const CollisionSpec& spec,
                             const SmallGeometry& geom,
                             const std::vector<GridDensity>& sample) {
  if (sample.empty()) throw std::invalid_argument("sample must be nonempty");
  LYReport rep;
  rep.sigma = (4.0 + 4.0 * 1.0) / map.lambda_min;
  rep.pass = true;
  double worst_b = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const GridDensity& mu = sample[i];
    GridDensity nu = pushforward_phi(pushforward_f0(mu, map), spec, geom);
    double tv_mu = tv_norm(mu), tv_nu = tv_norm(nu);
    if (tv_nu > tv_mu + 1e-12) {
      rep.pass = false;
      rep.violating_index = static_cast<int>(i);
      std::ostringstream os;
      os << "tv grew under the coupled step at sample " << i << ": "
         << tv_nu << " > " << tv_mu;
      rep.message = os.str();
      continue;
    }
    if (tv_mu == 0.0) continue;
    double need = spec.gap * (bv_norm(nu).bv - rep.sigma * bv_norm(mu).bv) /
                  tv_mu;
    worst_b = std::max(worst_b, need);
  }
  rep.B_empirical = std::max(0.0, worst_b);
  if (!std::isfinite(rep.B_empirical)) rep.pass = false;
  return rep;
}

DecoupleReport verify_decoupling(const CollisionSpec& spec,
                                 const SmallGeometry& geom, int site,
                                 const std::vector<GridDensity>& sample) {
  if (sample.empty()) throw std::invalid_argument("sample must be nonempty");
  if (site < 0 || site >= geom.k)
    throw std::invalid_argument("decouple site outside geometry");
  DecoupleReport rep;
  rep.bound_factor = 4.0 * 1.0 * spec.epsilon;
  rep.pass = true;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const GridDensity& mu = sample[i];
    GridDensity full = pushforward_phi(mu, spec, geom);
    GridDensity cut = pushforward_phi(mu, spec, geom, site);
    GridDensity g = full;
    for (std::size_t p = 0; p < g.c.size(); ++p) g.c[p] -= cut.c[p];
    g.probability = false;
    double lhs = tv_norm(g);
    double rhs = rep.bound_factor * bv_norm(mu).bv;
    if (lhs > rhs + 1e-12) {
      rep.pass = false;
      rep.violating_index = static_cast<int>(i);
      std::ostringstream os;
      os << "decoupling bound violated at sample " << i << ": " << lhs
         << " > " << rhs;
      rep.message = os.str();
    }
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
  }
  return rep;
}

}  // namespace cml

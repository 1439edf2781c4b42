#include "cml/local_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cml {

namespace {
constexpr double kEdgeTol = 1e-12;

bool on_grid(double v, int n, double tol = 1e-9) {
  double s = v * n;
  return std::abs(s - std::round(s)) <= tol;
}
}  // namespace

PiecewiseAffineMap make_map(std::vector<Branch> branches) {
  if (branches.empty()) throw std::invalid_argument("map needs branches");
  std::sort(branches.begin(), branches.end(),
            [](const Branch& a, const Branch& b) { return a.lo < b.lo; });
  if (std::abs(branches.front().lo) > kEdgeTol)
    throw std::invalid_argument("branch domains must start at 0");
  if (std::abs(branches.back().hi - 1.0) > kEdgeTol)
    throw std::invalid_argument("branch domains must end at 1");
  double lambda = std::abs(branches[0].slope);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const Branch& b = branches[i];
    if (b.hi <= b.lo) throw std::invalid_argument("empty branch domain");
    if (i + 1 < branches.size() &&
        std::abs(b.hi - branches[i + 1].lo) > kEdgeTol)
      throw std::invalid_argument("branch domains must tile [0,1)");
    double a = std::abs(b.slope);
    if (a <= 1.0) throw std::invalid_argument("branch slope magnitude must exceed 1");
    lambda = std::min(lambda, a);
    double y0 = b.slope * b.lo + b.intercept;
    double y1 = b.slope * b.hi + b.intercept;
    if (std::min(y0, y1) < -kEdgeTol || std::max(y0, y1) > 1.0 + kEdgeTol)
      throw std::invalid_argument("branch image must stay inside [0,1]");
  }
  PiecewiseAffineMap m;
  m.branches = std::move(branches);
  m.lambda_min = lambda;
  return m;
}

PiecewiseAffineMap doubling_map() {
  return make_map({{0.0, 0.5, 2.0, 0.0}, {0.5, 1.0, 2.0, -1.0}});
}

PiecewiseAffineMap decimal_map() {
  std::vector<Branch> bs;
  for (int k = 0; k < 10; ++k)
    bs.push_back({k / 10.0, (k + 1) / 10.0, 10.0, -static_cast<double>(k)});
  return make_map(std::move(bs));
}

PiecewiseAffineMap preset_map(const std::string& name) {
  if (name == "doubling") return doubling_map();
  if (name == "decimal") return decimal_map();
  throw std::invalid_argument("unknown map preset: " + name);
}

double eval(const PiecewiseAffineMap& map, double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("eval: x outside [0,1]");
  const auto& bs = map.branches;
  std::size_t i = bs.size() - 1;
  if (x < bs.back().lo) {
    // first branch with hi > x
    std::size_t lo = 0, hi = bs.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (x < bs[mid].hi) hi = mid; else lo = mid + 1;
    }
    i = lo;
  }
  double y = bs[i].slope * x + bs[i].intercept;
  return std::clamp(y, 0.0, 1.0);
}

std::vector<std::pair<double, double>> preimages(const PiecewiseAffineMap& map,
                                                 double y) {
  if (!(y >= 0.0 && y <= 1.0))
    throw std::domain_error("preimages: y outside [0,1]");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < map.branches.size(); ++i) {
    const Branch& b = map.branches[i];
    double x = (y - b.intercept) / b.slope;
    bool inside = (x >= b.lo && x < b.hi);
    bool closure = (i + 1 == map.branches.size() && std::abs(x - 1.0) <= kEdgeTol &&
                    std::abs(b.hi - 1.0) <= kEdgeTol);
    if (inside || closure)
      out.emplace_back(closure ? 1.0 : x, 1.0 / std::abs(b.slope));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_markov_for_grid(const PiecewiseAffineMap& map, int n_cells) {
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  for (const Branch& b : map.branches) {
    double y0 = b.slope * b.lo + b.intercept;
    double y1 = b.slope * b.hi + b.intercept;
    if (!on_grid(b.lo, n_cells) || !on_grid(b.hi, n_cells) ||
        !on_grid(y0, n_cells) || !on_grid(y1, n_cells))
      return false;
    double span = (b.hi - b.lo) * n_cells;
    if (span > 1.0 + 1e-9 &&
        std::abs(b.slope - std::round(b.slope)) > 1e-9)
      return false;
  }
  return true;
}

}  // namespace cml

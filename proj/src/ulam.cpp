#include "cml/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cml {

namespace {

long long ipow_ll(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

int window_index(double e, int n, const char* what) {
  double scaled = e * n;
  double r = std::round(scaled);
  if (std::abs(scaled - r) > 1e-9)
    throw std::invalid_argument(std::string(what) +
                                " endpoint not on the cell grid");
  return static_cast<int>(r);
}

void check_stochastic(const UlamMatrix& P) {
  for (int j = 0; j < P.dimension; ++j) {
    double s = 0.0;
    for (const auto& [c, w] : P.rows[j]) {
      if (w < 0.0) throw std::invalid_argument("negative matrix entry");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("matrix row is not stochastic");
  }
}

}  // namespace

UlamMatrix build_ulam_single(const PiecewiseAffineMap& map, int n_cells) {
  if (n_cells < 2) throw std::invalid_argument("n_cells must be >= 2");
  UlamMatrix P;
  P.dimension = n_cells;
  P.k = 1;
  P.n_cells = n_cells;
  P.rows = transfer_rows_1d(map, n_cells);
  check_stochastic(P);
  return P;
}

std::vector<int> phi_cell_map(const CollisionSpec& spec,
                              const SmallGeometry& geom, int n_cells,
                              int decouple_at) {
  int k = geom.k, n = n_cells;
  long long dim = ipow_ll(n, k);
  std::vector<int> target(dim);
  for (long long i = 0; i < dim; ++i) target[i] = static_cast<int>(i);
  if (spec.intervals.empty()) return target;
  if (spec.intervals.size() != 2)
    throw std::invalid_argument("one-dimensional chain expects two windows");
  int plo = window_index(spec.intervals[0].lo, n, "plus window");
  int phi_ = window_index(spec.intervals[0].hi, n, "plus window");
  int mlo = window_index(spec.intervals[1].lo, n, "minus window");
  int mhi = window_index(spec.intervals[1].hi, n, "minus window");
  auto pairs = ordered_pairs(geom);
  std::vector<long long> stride(k, 1);
  for (int a = k - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
  std::vector<int> m(k);
  for (long long idx = 0; idx < dim; ++idx) {
    long long rest = idx;
    for (int a = 0; a < k; ++a) {
      m[a] = static_cast<int>(rest / stride[a]);
      rest %= stride[a];
    }
    for (const auto& [s, t] : pairs) {
      if (s == decouple_at || t == decouple_at) continue;
      if (m[s] >= plo && m[s] < phi_ && m[t] >= mlo && m[t] < mhi) {
        target[idx] = static_cast<int>(idx + (m[t] - m[s]) * stride[s] +
                                       (m[s] - m[t]) * stride[t]);
        break;
      }
    }
  }
  return target;
}

UlamMatrix build_ulam_coupled(const PiecewiseAffineMap& map,
                              const CollisionSpec& spec,
                              const SmallGeometry& geom, int n_cells) {
  if (geom.k < 2 || geom.k > 3)
    throw std::invalid_argument("coupled operator needs 2 or 3 sites");
  if (!is_markov_for_grid(map, n_cells))
    throw std::invalid_argument(
        "map is not Markov for this grid; matrix would not be exact");
  SparseRows single = transfer_rows_1d(map, n_cells);
  std::vector<int> perm = phi_cell_map(spec, geom, n_cells);
  int k = geom.k, n = n_cells;
  long long dim = ipow_ll(n, k);
  UlamMatrix P;
  P.dimension = static_cast<int>(dim);
  P.k = k;
  P.n_cells = n;
  P.rows.assign(dim, {});
  std::vector<long long> stride(k, 1);
  for (int a = k - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
#pragma omp parallel
  {
    std::vector<double> scratch(dim, 0.0);
    std::vector<int> touched;
    std::vector<int> m(k);
#pragma omp for schedule(static)
    for (long long j = 0; j < dim; ++j) {
      long long rest = j;
      for (int a = 0; a < k; ++a) {
        m[a] = static_cast<int>(rest / stride[a]);
        rest %= stride[a];
      }
      // tensor product of the per-axis rows, columns pushed through the swap
      std::vector<std::pair<long long, double>> partial = {{0, 1.0}};
      for (int a = 0; a < k; ++a) {
        std::vector<std::pair<long long, double>> next;
        next.reserve(partial.size() * single[m[a]].size());
        for (const auto& [base, w] : partial)
          for (const auto& [col, cw] : single[m[a]])
            next.push_back({base + col * stride[a], w * cw});
        partial.swap(next);
      }
      for (const auto& [col, w] : partial) {
        int tcol = perm[col];
        if (scratch[tcol] == 0.0) touched.push_back(tcol);
        scratch[tcol] += w;
      }
      std::sort(touched.begin(), touched.end());
      auto& row = P.rows[j];
      row.reserve(touched.size());
      for (int c : touched) {
        row.push_back({c, scratch[c]});
        scratch[c] = 0.0;
      }
      touched.clear();
    }
  }
  check_stochastic(P);
  return P;
}

SpectralReport stationary_density(const UlamMatrix& P, double tol,
                                  int max_iter,
                                  const std::vector<double>* start) {
  check_stochastic(P);
  int dim = P.dimension;
  if (dim <= 0) throw std::invalid_argument("empty matrix");
  SpectralReport rep;
  std::vector<double> pi(dim, 1.0 / dim), next(dim);
  if (start) {
    if (static_cast<int>(start->size()) != dim)
      throw std::invalid_argument("start vector size mismatch");
    pi = *start;
    double s = 0.0;
    for (double v : pi) {
      if (v < 0.0) throw std::invalid_argument("start vector must be >= 0");
      s += v;
    }
    if (s <= 0.0) throw std::invalid_argument("start vector must be nonzero");
    for (double& v : pi) v /= s;
  }
  double residual = 0.0, leading = 1.0;
  int it = 0;
  bool converged = false;
  while (it < max_iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int j = 0; j < dim; ++j) {
      double v = pi[j];
      if (v == 0.0) continue;
      for (const auto& [c, w] : P.rows[j]) next[c] += v * w;
    }
    ++it;
    residual = 0.0;
    double snew = 0.0;
    for (int i = 0; i < dim; ++i) {
      residual += std::abs(next[i] - pi[i]);
      snew += next[i];
    }
    leading = snew;  // previous iterate had mass 1
    pi.swap(next);
    if (snew > 0.0)
      for (double& v : pi) v /= snew;
    if (residual < tol) {
      converged = true;
      break;
    }
  }
  rep.iterations = it;
  rep.converged = converged;
  rep.residual = residual;
  rep.leading_eigenvalue = leading;
  if (!converged) {
    std::ostringstream os;
    os << "no convergence within " << max_iter
       << " iterations; last residual " << residual;
    rep.message = os.str();
  }
  std::vector<double> dens(pi);
  for (double& v : dens) v *= dim;  // mass to density on the unit cube
  rep.stationary = GridDensity{P.k, P.n_cells, std::move(dens), true};

  // subdominant modulus: iterate on the zero-sum complement
  std::mt19937_64 gen(12345);
  std::vector<double> w(dim);
  double mean = 0.0;
  for (int i = 0; i < dim; ++i) {
    w[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    mean += w[i];
  }
  mean /= dim;
  double norm = 0.0;
  for (int i = 0; i < dim; ++i) {
    w[i] -= mean;
    norm += std::abs(w[i]);
  }
  if (norm > 0.0)
    for (double& v : w) v /= norm;
  std::vector<double> wn(dim);
  double prev_est = -1.0, ratio_prev = -1.0, modulus = 0.0;
  for (int k2 = 0; k2 < max_iter; ++k2) {
    std::fill(wn.begin(), wn.end(), 0.0);
    for (int j = 0; j < dim; ++j) {
      double v = w[j];
      if (v == 0.0) continue;
      for (const auto& [c, wt] : P.rows[j]) wn[c] += v * wt;
    }
    double s = 0.0;
    for (double v : wn) s += v;
    for (int i = 0; i < dim; ++i) wn[i] -= s * pi[i];
    double nn = 0.0;
    for (double v : wn) nn += std::abs(v);
    if (nn < 1e-14) {
      modulus = 0.0;
      break;
    }
    double est = ratio_prev > 0.0 ? std::sqrt(nn * ratio_prev) : nn;
    ratio_prev = nn;
    w.swap(wn);
    for (double& v : w) v /= nn;
    modulus = est;
    if (prev_est >= 0.0 && std::abs(est - prev_est) < tol * std::max(1.0, est))
      break;
    prev_est = est;
  }
  rep.second_modulus = modulus;
  rep.gap = 1.0 - modulus;
  rep.mixing = converged && modulus < 1.0 - 10.0 * tol;
  return rep;
}

double compare_with_empirical(const SpectralReport& report,
                              const GridDensity& histogram) {
  const GridDensity& a = report.stationary;
  if (a.k != histogram.k || a.n_cells != histogram.n_cells)
    throw std::invalid_argument("grids do not match");
  double s = 0.0;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    s += std::abs(a.c[i] - histogram.c[i]);
  return s * cell_volume(a);
}

void write_matrix_coo(std::ostream& os, const UlamMatrix& P) {
  os.precision(17);
  for (int j = 0; j < P.dimension; ++j)
    for (const auto& [c, w] : P.rows[j]) os << j << " " << c << " " << w << "\n";
}

}  // namespace cml

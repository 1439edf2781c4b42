#include "cml/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cml {

namespace {

long long ipow(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

GridDensity make_density(int k, int n_cells, std::vector<double> c,
                         bool probability) {
  if (k < 1 || k > 3) throw std::invalid_argument("k must be 1, 2 or 3");
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  long long want = ipow(n_cells, k);
  if (static_cast<long long>(c.size()) != want)
    throw std::invalid_argument("coefficient count must be n_cells^k");
  GridDensity mu{k, n_cells, std::move(c), probability};
  if (probability) {
    for (double v : mu.c)
      if (v < 0.0)
        throw std::invalid_argument("probability density must be nonnegative");
    if (std::abs(integral(mu) - 1.0) > 1e-12)
      throw std::invalid_argument("probability density must integrate to 1");
  }
  return mu;
}

GridDensity constant_density(int k, int n_cells, double value) {
  std::vector<double> c(ipow(n_cells, k), value);
  return {k, n_cells, std::move(c), value == 1.0};
}

int cell_count(const GridDensity& mu) { return static_cast<int>(mu.c.size()); }

double cell_volume(const GridDensity& mu) {
  double v = 1.0;
  for (int a = 0; a < mu.k; ++a) v /= mu.n_cells;
  return v;
}

double integral(const GridDensity& mu) {
  double s = 0.0;
  for (double v : mu.c) s += v;
  return s * cell_volume(mu);
}

double tv_norm(const GridDensity& mu) {
  double s = 0.0;
  for (double v : mu.c) s += std::abs(v);
  return s * cell_volume(mu);
}

NormReport bv_norm(const GridDensity& mu) {
  NormReport rep;
  int n = mu.n_cells;
  double transverse = 1.0;
  for (int a = 0; a < mu.k - 1; ++a) transverse /= n;
  rep.per_direction_variation.assign(mu.k, 0.0);
  // stride of axis a, row-major with axis 0 slowest
  for (int a = 0; a < mu.k; ++a) {
    long long stride = 1;
    for (int b = mu.k - 1; b > a; --b) stride *= n;
    long long block = stride * n;  // size of one axis-a line's span
    double var = 0.0;
    long long total = static_cast<long long>(mu.c.size());
    for (long long base = 0; base < total; base += block) {
      for (long long off = 0; off < stride; ++off) {
        long long p = base + off;
        double prev = mu.c[p];
        double line = std::abs(prev);
        for (int i = 1; i < n; ++i) {
          double cur = mu.c[p + i * stride];
          line += std::abs(cur - prev);
          prev = cur;
        }
        line += std::abs(prev);
        var += line;
      }
    }
    rep.per_direction_variation[a] = var * transverse;
  }
  rep.tv = tv_norm(mu);
  rep.bv = *std::max_element(rep.per_direction_variation.begin(),
                             rep.per_direction_variation.end());
  return rep;
}

GridDensity marginal(const GridDensity& mu,
                     const std::vector<int>& keep_sites) {
  if (keep_sites.empty())
    throw std::invalid_argument("keep_sites must be nonempty");
  std::vector<int> keep = keep_sites;
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int s : keep)
    if (s < 0 || s >= mu.k)
      throw std::invalid_argument("keep_sites outside density support");
  int ko = static_cast<int>(keep.size());
  int n = mu.n_cells;
  int dropped = mu.k - ko;
  if (dropped == 0) return mu;
  GridDensity out{ko, n, std::vector<double>(ipow(n, ko), 0.0),
                  mu.probability};
  double w = 1.0;
  for (int a = 0; a < dropped; ++a) w /= n;
  std::vector<long long> stride(mu.k, 1);
  for (int a = mu.k - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
  std::vector<long long> out_stride(ko, 1);
  for (int a = ko - 2; a >= 0; --a) out_stride[a] = out_stride[a + 1] * n;
  long long total = static_cast<long long>(mu.c.size());
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx, oi = 0;
    for (int a = 0, ka = 0; a < mu.k; ++a) {
      long long coord = rest / stride[a];
      rest %= stride[a];
      if (ka < ko && keep[ka] == a) {
        oi += coord * out_stride[ka];
        ++ka;
      }
    }
    out.c[oi] += mu.c[idx] * w;
  }
  return out;
}

GridDensity refine(const GridDensity& mu, int factor) {
  if (factor < 1) throw std::invalid_argument("refine factor must be >= 1");
  if (factor == 1) return mu;
  int n = mu.n_cells, m = n * factor;
  GridDensity out{mu.k, m, std::vector<double>(ipow(m, mu.k)), mu.probability};
  std::vector<long long> stride(mu.k, 1), fstride(mu.k, 1);
  for (int a = mu.k - 2; a >= 0; --a) {
    stride[a] = stride[a + 1] * n;
    fstride[a] = fstride[a + 1] * m;
  }
  long long total = static_cast<long long>(out.c.size());
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx, src = 0;
    for (int a = 0; a < mu.k; ++a) {
      long long coord = rest / fstride[a];
      rest %= fstride[a];
      src += (coord / factor) * stride[a];
    }
    out.c[idx] = mu.c[src];
  }
  return out;
}

SparseRows transfer_rows_1d(const PiecewiseAffineMap& map, int n_cells) {
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  int n = n_cells;
  SparseRows rows(n);
  std::vector<double> acc(n);
  for (int j = 0; j < n; ++j) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double clo = static_cast<double>(j) / n;
    double chi = static_cast<double>(j + 1) / n;
    for (const Branch& b : map.branches) {
      double a = std::max(b.lo, clo);
      double e = std::min(b.hi, chi);
      if (a >= e) continue;
      double ya = b.slope * a + b.intercept;
      double ye = b.slope * e + b.intercept;
      double ylo = std::min(ya, ye), yhi = std::max(ya, ye);
      double inv = 1.0 / std::abs(b.slope);
      int mlo = std::max(0, static_cast<int>(std::floor(ylo * n)));
      int mhi = std::min(n - 1, static_cast<int>(std::floor(yhi * n - 1e-15)));
      for (int m2 = mlo; m2 <= mhi; ++m2) {
        double olo = std::max(ylo, static_cast<double>(m2) / n);
        double ohi = std::min(yhi, static_cast<double>(m2 + 1) / n);
        if (ohi > olo) acc[m2] += n * (ohi - olo) * inv;
      }
    }
    for (int m2 = 0; m2 < n; ++m2)
      if (acc[m2] != 0.0) rows[j].push_back({m2, acc[m2]});
  }
  return rows;
}

GridDensity apply_transfer_axis(const GridDensity& mu, const SparseRows& rows,
                                int axis) {
  if (axis < 0 || axis >= mu.k) throw std::invalid_argument("bad axis");
  if (static_cast<int>(rows.size()) != mu.n_cells)
    throw std::invalid_argument("transfer matrix size mismatch");
  int n = mu.n_cells;
  GridDensity out{mu.k, n, std::vector<double>(mu.c.size(), 0.0), false};
  long long stride = 1;
  for (int b = mu.k - 1; b > axis; --b) stride *= n;
  long long block = stride * n;
  long long total = static_cast<long long>(mu.c.size());
  for (long long base = 0; base < total; base += block) {
    for (long long off = 0; off < stride; ++off) {
      long long p = base + off;
      for (int j = 0; j < n; ++j) {
        double v = mu.c[p + j * stride];
        if (v == 0.0) continue;
        for (const auto& [col, w] : rows[j]) out.c[p + col * stride] += v * w;
      }
    }
  }
  out.probability = mu.probability;
  return out;
}

std::vector<std::pair<int, int>> ordered_pairs(const SmallGeometry& geom) {
  if (geom.k < 1 || geom.k > 3)
    throw std::invalid_argument("small geometry supports 1 to 3 sites");
  std::vector<std::pair<int, int>> out;
  if (geom.arrangement == SmallGeometry::Arrangement::path) {
    for (int s = 0; s + 1 < geom.k; ++s) out.push_back({s, s + 1});
  } else {
    if (geom.k >= 2)
      for (int s = 0; s < geom.k; ++s) out.push_back({s, (s + 1) % geom.k});
  }
  return out;
}

void write_density(std::ostream& os, const GridDensity& mu) {
  os << mu.k << " " << mu.n_cells << "\n";
  os.precision(17);
  for (double v : mu.c) os << v << "\n";
}

GridDensity read_density(std::istream& is) {
  int k = 0, n = 0;
  if (!(is >> k >> n)) throw std::runtime_error("bad density header");
  if (k < 1 || k > 3 || n < 1) throw std::runtime_error("bad density header");
  std::vector<double> c(ipow(n, k));
  for (double& v : c)
    if (!(is >> v)) throw std::runtime_error("truncated density file");
  return {k, n, std::move(c), false};
}

GridDensity load_density(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open density file: " + path);
  return read_density(f);
}

void save_density(const std::string& path, const GridDensity& mu) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write density file: " + path);
  write_density(f, mu);
}

}  // namespace cml

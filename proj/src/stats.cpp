#include "cml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cml/rng.hpp"

namespace cml {

namespace {

double apply_kind(const Observable& obs, double p) {
  switch (obs.kind) {
    case Observable::Kind::coordinate:
      return p;
    case Observable::Kind::centered_coordinate:
      return p - 0.5;
    case Observable::Kind::smooth_bump: {
      double u = (p - obs.center) / obs.width;
      double d = 1.0 - u * u;
      return d > 0.0 ? std::exp(1.0 - 1.0 / d) : 0.0;
    }
  }
  return 0.0;
}

void check_observable(const Observable& obs, const LatticeGeometry& geom) {
  if (obs.support.empty())
    throw std::invalid_argument("observable support must be nonempty");
  int n = n_sites(geom);
  for (int s : obs.support)
    if (s < 0 || s >= n)
      throw std::invalid_argument("observable support outside the lattice");
  if (obs.kind == Observable::Kind::smooth_bump && obs.width <= 0.0)
    throw std::invalid_argument("bump width must be positive");
}

// index of site i shifted by `shift` along axis 0
int shift_axis0(const LatticeGeometry& geom, int i, int shift) {
  int stride = 1;
  for (int a = 1; a < geom.d; ++a) stride *= geom.sides[a];
  int side = geom.sides[0];
  int c0 = (i / stride) % side;
  int moved = ((c0 + shift) % side + side) % side;
  return i + (moved - c0) * stride;
}

struct ReplicaSeries {
  std::vector<double> values;  // offsets x lags, row-major
  std::vector<double> se;
  long long n_samples = 0;
};

// One trajectory of the source, phi anchored at every base site i (shifted
// along axis 0), psi read at site i + j for every offset j and lag n.
ReplicaSeries run_replica(const TrajectorySource& src, const Observable& phi,
                          const Observable& psi, int max_lag,
                          const std::vector<int>& offsets, int replica) {
  const LatticeGeometry& geom = src.geometry;
  int n = n_sites(geom);
  int L = max_lag + 1;
  int no = static_cast<int>(offsets.size());
  long long T = src.steps;
  int B = 32;
  long long bsize = T / B;

  std::uint64_t rseed = derive_seed(src.seed, static_cast<std::uint64_t>(replica));
  Rng init(derive_seed(rseed, 0));
  std::uint64_t dseed = derive_seed(rseed, 1);
  LatticeState x(n), scratch(n);
  for (int i = 0; i < n; ++i) x[i] = init.uniform();
  CollisionPairList pairs;
  std::uint64_t t_global = 0;
  for (long long t = 0; t < src.burn_in; ++t)
    step_inplace(x, scratch, src.map, src.coupling, geom, pairs, src.dither,
                 dseed, t_global++);

  int max_off = 0;
  for (int j : offsets) max_off = std::max(max_off, j);
  std::vector<std::vector<int>> phi_tbl(phi.support.size());
  for (std::size_t s = 0; s < phi.support.size(); ++s) {
    phi_tbl[s].resize(n);
    for (int i = 0; i < n; ++i)
      phi_tbl[s][i] = shift_axis0(geom, phi.support[s], i);
  }
  std::vector<std::vector<int>> psi_tbl(psi.support.size());
  for (std::size_t s = 0; s < psi.support.size(); ++s) {
    psi_tbl[s].resize(n);
    for (int i = 0; i < n; ++i)
      psi_tbl[s][i] = shift_axis0(geom, psi.support[s], i);
  }

  std::vector<double> ring(static_cast<std::size_t>(L) * n, 0.0);
  std::vector<double> psi_row(n), psi_pad(static_cast<std::size_t>(n) + max_off);
  std::vector<double> acc(static_cast<std::size_t>(no) * L, 0.0);
  std::vector<double> bacc(static_cast<std::size_t>(B) * no * L, 0.0);
  double sphi = 0.0, spsi = 0.0;

  auto fill_phi = [&](double* dst) {
    for (int i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t s = 0; s < phi_tbl.size(); ++s) p *= x[phi_tbl[s][i]];
      dst[i] = apply_kind(phi, p);
    }
  };
  auto fill_psi = [&]() {
    for (int i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t s = 0; s < psi_tbl.size(); ++s) p *= x[psi_tbl[s][i]];
      psi_row[i] = apply_kind(psi, p);
    }
    for (int i = 0; i < n; ++i) psi_pad[i] = psi_row[i];
    for (int j = 0; j < max_off; ++j) psi_pad[n + j] = psi_row[j];
  };

  // the ring holds the last L phi rows; lag n pairs row u-n with psi at u
  for (int t = 0; t + 1 < L; ++t) {
    fill_phi(&ring[static_cast<std::size_t>(t % L) * n]);
    step_inplace(x, scratch, src.map, src.coupling, geom, pairs, src.dither,
                 dseed, t_global++);
  }
  for (long long t = 0; t < T; ++t) {
    long long u = (L - 1) + t;
    double* row = &ring[static_cast<std::size_t>(u % L) * n];
    fill_phi(row);
    fill_psi();
    int b = static_cast<int>(std::min<long long>(t / bsize, B - 1));
    double* bslot = &bacc[static_cast<std::size_t>(b) * no * L];
    for (int oi = 0; oi < no; ++oi) {
      const double* pj = &psi_pad[offsets[oi]];
      for (int lag = 0; lag < L; ++lag) {
        const double* prow = &ring[static_cast<std::size_t>((u - lag) % L) * n];
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += prow[i] * pj[i];
        acc[static_cast<std::size_t>(oi) * L + lag] += dot;
        bslot[static_cast<std::size_t>(oi) * L + lag] += dot;
      }
    }
    for (int i = 0; i < n; ++i) sphi += row[i];
    for (int i = 0; i < n; ++i) spsi += psi_row[i];
    step_inplace(x, scratch, src.map, src.coupling, geom, pairs, src.dither,
                 dseed, t_global++);
  }

  double M = static_cast<double>(T) * n;
  double mphi = sphi / M;
  double mpsi = spsi / M;
  ReplicaSeries out;
  out.values.resize(acc.size());
  out.se.resize(acc.size());
  out.n_samples = static_cast<long long>(M);
  for (std::size_t p = 0; p < acc.size(); ++p)
    out.values[p] = acc[p] / M - mphi * mpsi;
  std::vector<double> cb(B);
  for (int oi = 0; oi < no; ++oi) {
    for (int lag = 0; lag < L; ++lag) {
      std::size_t at = static_cast<std::size_t>(oi) * L + lag;
      double mean = 0.0;
      for (int b = 0; b < B; ++b) {
        long long rows = (b == B - 1) ? T - bsize * (B - 1) : bsize;
        cb[b] = bacc[static_cast<std::size_t>(b) * no * L + at] /
                    (static_cast<double>(rows) * n) -
                mphi * mpsi;
        mean += cb[b];
      }
      mean /= B;
      double var = 0.0;
      for (int b = 0; b < B; ++b) var += (cb[b] - mean) * (cb[b] - mean);
      var /= (B - 1);
      out.se[at] = std::sqrt(var / B);
    }
  }
  return out;
}

std::vector<CorrelationSeries> correlation_matrix(
    const TrajectorySource& src, const Observable& phi, const Observable& psi,
    int max_lag, const std::vector<int>& offsets) {
  if (max_lag < 0) throw std::invalid_argument("max_lag must be >= 0");
  check_observable(phi, src.geometry);
  check_observable(psi, src.geometry);
  if (src.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  long long n = n_sites(src.geometry);
  if (src.steps < 32 || src.steps * n < 100LL * max_lag)
    throw std::invalid_argument("insufficient trajectory length");
  if (offsets.empty()) throw std::invalid_argument("offsets must be nonempty");
  int side0 = src.geometry.sides[0];
  for (int j : offsets)
    if (j < 0 || j >= side0)
      throw std::invalid_argument("offsets must lie within the lattice");

  int R = src.replicas;
  std::vector<ReplicaSeries> parts(R);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < R; ++r)
    parts[r] = run_replica(src, phi, psi, max_lag, offsets, r);

  int L = max_lag + 1;
  int no = static_cast<int>(offsets.size());
  std::vector<CorrelationSeries> out(no);
  double Mtot = 0.0;
  for (const auto& p : parts) Mtot += static_cast<double>(p.n_samples);
  for (int oi = 0; oi < no; ++oi) {
    CorrelationSeries& s = out[oi];
    s.lags.resize(L);
    s.values.assign(L, 0.0);
    s.std_err.assign(L, 0.0);
    s.n_samples = static_cast<long long>(Mtot);
    for (int lag = 0; lag < L; ++lag) {
      s.lags[lag] = lag;
      double v = 0.0, varsum = 0.0;
      std::size_t at = static_cast<std::size_t>(oi) * L + lag;
      for (const auto& p : parts) {
        double M = static_cast<double>(p.n_samples);
        v += M * p.values[at];
        varsum += (M * p.se[at]) * (M * p.se[at]);
      }
      s.values[lag] = v / Mtot;
      s.std_err[lag] = std::sqrt(varsum) / Mtot;
    }
  }
  return out;
}

}  // namespace

double observe(const Observable& obs, const LatticeState& x) {
  double p = 1.0;
  for (int s : obs.support) {
    if (s < 0 || s >= static_cast<int>(x.size()))
      throw std::invalid_argument("observable support outside the lattice");
    p *= x[s];
  }
  return apply_kind(obs, p);
}

double observe_shifted(const Observable& obs, const LatticeState& x,
                       const LatticeGeometry& geom, int shift) {
  double p = 1.0;
  for (int s : obs.support) p *= x[shift_axis0(geom, s, shift)];
  return apply_kind(obs, p);
}

CorrelationSeries time_correlation(const TrajectorySource& source,
                                   const Observable& phi,
                                   const Observable& psi, int max_lag) {
  return correlation_matrix(source, phi, psi, max_lag, {0})[0];
}

std::vector<CorrelationSeries> space_time_correlation(
    const TrajectorySource& source, const Observable& phi,
    const Observable& psi, int max_lag, const std::vector<int>& offsets) {
  return correlation_matrix(source, phi, psi, max_lag, offsets);
}

ExpFit fit_exponential(const CorrelationSeries& series) {
  ExpFit fit;
  std::size_t L = series.values.size();
  if (L == 0 || L != series.lags.size() || L != series.std_err.size())
    throw std::invalid_argument("malformed correlation series");
  // usable range: contiguous prefix of lags above the 3 stderr floor
  std::size_t usable = 0;
  while (usable < L &&
         std::abs(series.values[usable]) > 3.0 * series.std_err[usable])
    ++usable;
  fit.noise_floor = usable < L ? static_cast<double>(series.lags[usable])
                               : static_cast<double>(series.lags.back() + 1);
  if (usable < 4) {
    fit.ok = false;
    fit.error = "insufficient decay range";
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = static_cast<int>(usable);
  for (std::size_t i = 0; i < usable; ++i) {
    double nx = series.lags[i];
    double ny = std::log(std::abs(series.values[i]));
    sx += nx;
    sy += ny;
    sxx += nx * nx;
    sxy += nx * ny;
  }
  double denom = m * sxx - sx * sx;
  fit.rate = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.rate * sx) / m;
  double ss_res = 0.0, ss_tot = 0.0, ymean = sy / m;
  for (std::size_t i = 0; i < usable; ++i) {
    double nx = series.lags[i];
    double ny = std::log(std::abs(series.values[i]));
    double pred = fit.intercept + fit.rate * nx;
    ss_res += (ny - pred) * (ny - pred);
    ss_tot += (ny - ymean) * (ny - ymean);
  }
  fit.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot)
                               : (ss_res == 0.0 ? 1.0 : 0.0);
  fit.ok = true;
  return fit;
}

CollisionRate collision_rate(const TrajectorySource& source,
                             long long window) {
  if (window < 1 || window > source.steps)
    throw std::invalid_argument("window must be within the trajectory");
  if (source.replicas < 1)
    throw std::invalid_argument("replicas must be >= 1");
  const LatticeGeometry& geom = source.geometry;
  int n = n_sites(geom);
  long long skip = source.burn_in + (source.steps - window);
  CollisionRate out;
  std::vector<long long> events(source.replicas, 0);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < source.replicas; ++r) {
    std::uint64_t rseed = derive_seed(source.seed, static_cast<std::uint64_t>(r));
    Rng init(derive_seed(rseed, 0));
    std::uint64_t dseed = derive_seed(rseed, 1);
    LatticeState x(n), scratch(n);
    for (int i = 0; i < n; ++i) x[i] = init.uniform();
    CollisionPairList pairs;
    std::uint64_t t = 0;
    long long count = 0;
    for (long long s = 0; s < skip + window; ++s) {
      step_inplace(x, scratch, source.map, source.coupling, geom, pairs,
                   source.dither, dseed, t++);
      if (s >= skip) count += static_cast<long long>(pairs.size());
    }
    events[r] = count;
  }
  for (long long e : events) out.events += e;
  out.trials = window * static_cast<long long>(n) * geom.d * source.replicas;
  out.rate = static_cast<double>(out.events) / static_cast<double>(out.trials);
  out.std_err =
      std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(out.trials));
  return out;
}

GridDensity marginal_histogram(const TrajectorySource& source,
                               const std::vector<int>& sites, int n_cells) {
  if (sites.empty() || sites.size() > 3)
    throw std::invalid_argument("histogram supports 1 to 3 sites");
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  if (source.replicas < 1)
    throw std::invalid_argument("replicas must be >= 1");
  const LatticeGeometry& geom = source.geometry;
  int n = n_sites(geom);
  for (int s : sites)
    if (s < 0 || s >= n)
      throw std::invalid_argument("histogram sites outside the lattice");
  int k = static_cast<int>(sites.size());
  long long dim = 1;
  for (int a = 0; a < k; ++a) dim *= n_cells;
  std::vector<std::vector<long long>> counts(
      source.replicas, std::vector<long long>(dim, 0));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < source.replicas; ++r) {
    std::uint64_t rseed = derive_seed(source.seed, static_cast<std::uint64_t>(r));
    Rng init(derive_seed(rseed, 0));
    std::uint64_t dseed = derive_seed(rseed, 1);
    LatticeState x(n), scratch(n);
    for (int i = 0; i < n; ++i) x[i] = init.uniform();
    CollisionPairList pairs;
    std::uint64_t t = 0;
    for (long long s = 0; s < source.burn_in; ++s)
      step_inplace(x, scratch, source.map, source.coupling, geom, pairs,
                   source.dither, dseed, t++);
    auto& cnt = counts[r];
    for (long long s = 0; s < source.steps; ++s) {
      step_inplace(x, scratch, source.map, source.coupling, geom, pairs,
                   source.dither, dseed, t++);
      long long idx = 0;
      for (int a = 0; a < k; ++a) {
        int m = static_cast<int>(x[sites[a]] * n_cells);
        if (m >= n_cells) m = n_cells - 1;
        idx = idx * n_cells + m;
      }
      ++cnt[idx];
    }
  }
  long long total = source.steps * source.replicas;
  GridDensity out{k, n_cells, std::vector<double>(dim, 0.0), true};
  double scale = static_cast<double>(dim) / static_cast<double>(total);
  for (long long i = 0; i < dim; ++i) {
    long long c = 0;
    for (int r = 0; r < source.replicas; ++r) c += counts[r][i];
    out.c[i] = c * scale;
  }
  return out;
}

}  // namespace cml

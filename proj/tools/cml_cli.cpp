#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "cml/config.hpp"
#include "cml/measure_bv.hpp"
#include "cml/rng.hpp"
#include "cml/stats.hpp"
#include "cml/ulam.hpp"
#include "json.hpp"

using nlohmann::json;
using namespace cml;

namespace {

struct Staged {
  std::string name;
  std::string content;
};

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return std::string(buf);
}

// Key order is alphabetical, so the timestamp lands on its own final line
// and everything above it is reproducible for a fixed config + seed.
std::string summary_json(const std::string& command,
                         const ExperimentConfig& cfg, json results) {
  json j;
  j["command"] = command;
  j["config"] = json::parse(resolved_config_json(cfg));
  j["results"] = std::move(results);
  j["timestamp"] = iso_timestamp();
  return j.dump(2) + "\n";
}

std::string csv_num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

TrajectorySource trajectory_source(const ExperimentConfig& cfg) {
  TrajectorySource src;
  src.map = cfg.map;
  src.geometry = cfg.geometry;
  src.coupling = coupling_spec(cfg);
  src.seed = cfg.run.seed;
  src.steps = cfg.run.steps;
  src.burn_in = cfg.run.burn_in;
  src.dither = cfg.run.dither;
  src.replicas = cfg.run.replicas;
  return src;
}

int cmd_simulate(const ExperimentConfig& cfg, std::vector<Staged>& files) {
  CollisionSpec spec = coupling_spec(cfg);
  int n = n_sites(cfg.geometry);
  std::uint64_t rseed = derive_seed(cfg.run.seed, 0);
  Rng init(derive_seed(rseed, 0));
  std::uint64_t dseed = derive_seed(rseed, 1);
  LatticeState x(n), scratch(n);
  for (double& v : x) v = init.uniform();
  CollisionPairList pairs;
  std::uint64_t t = 0;
  for (long long s = 0; s < cfg.run.burn_in; ++s)
    step_inplace(x, scratch, cfg.map, spec, cfg.geometry, pairs,
                 cfg.run.dither, dseed, t++);
  long long events = 0;
  std::ostringstream coll;
  if (cfg.simulate.record_collisions) coll << "step,count\n";
  for (long long s = 0; s < cfg.run.steps; ++s) {
    step_inplace(x, scratch, cfg.map, spec, cfg.geometry, pairs,
                 cfg.run.dither, dseed, t++);
    events += static_cast<long long>(pairs.size());
    if (cfg.simulate.record_collisions)
      coll << s << "," << pairs.size() << "\n";
  }
  long long trials =
      cfg.run.steps * static_cast<long long>(n) * cfg.geometry.d;
  std::ostringstream state;
  state << "site,value\n";
  for (int i = 0; i < n; ++i) state << i << "," << csv_num(x[i]) << "\n";

  json results;
  results["n_sites"] = n;
  results["steps"] = cfg.run.steps;
  results["burn_in"] = cfg.run.burn_in;
  results["collision_events"] = events;
  results["collision_trials"] = trials;
  results["collision_rate"] =
      static_cast<double>(events) / static_cast<double>(trials);
  files.push_back({"final_state.csv", state.str()});
  if (cfg.simulate.record_collisions)
    files.push_back({"collisions.csv", coll.str()});
  files.push_back({"summary.json", summary_json("simulate", cfg, results)});
  return 0;
}

int cmd_ulam(const ExperimentConfig& cfg, std::vector<Staged>& files) {
  const UlamOptions& opt = cfg.ulam;
  UlamMatrix P;
  if (opt.sites == 1) {
    P = build_ulam_single(cfg.map, opt.n_cells);
  } else {
    P = build_ulam_coupled(cfg.map, coupling_spec(cfg),
                           small_geometry(opt.sites, opt.arrangement),
                           opt.n_cells);
  }
  SpectralReport rep = stationary_density(P, opt.tol, opt.max_iter);
  double max_dev = 0.0;
  for (int s = 1; s < opt.starts; ++s) {
    Rng rng(derive_seed(cfg.run.seed, static_cast<std::uint64_t>(s)));
    std::vector<double> start(P.dimension);
    double sum = 0.0;
    for (double& v : start) sum += (v = rng.uniform() + 0.01);
    for (double& v : start) v /= sum;
    SpectralReport other = stationary_density(P, opt.tol, opt.max_iter, &start);
    max_dev = std::max(max_dev, compare_with_empirical(rep, other.stationary));
  }

  std::ostringstream mtx;
  write_matrix_coo(mtx, P);
  std::ostringstream dens;
  write_density(dens, rep.stationary);

  json results;
  results["dimension"] = P.dimension;
  results["leading_eigenvalue"] = rep.leading_eigenvalue;
  results["second_modulus"] = rep.second_modulus;
  results["spectral_gap"] = rep.gap;
  results["iterations"] = rep.iterations;
  results["converged"] = rep.converged;
  results["mixing"] = rep.mixing;
  results["residual"] = rep.residual;
  results["max_start_deviation"] = max_dev;
  if (!rep.message.empty()) results["message"] = rep.message;
  files.push_back({"matrix.coo", mtx.str()});
  files.push_back({"stationary.txt", dens.str()});
  files.push_back({"summary.json", summary_json("ulam", cfg, results)});
  return rep.converged ? 0 : 2;
}

int cmd_verify_ly(const ExperimentConfig& cfg, std::vector<Staged>& files) {
  const VerifyLyOptions& opt = cfg.verify_ly;
  SmallGeometry geom = small_geometry(opt.sites, opt.arrangement);
  std::vector<GridDensity> sample;
  sample.reserve(opt.samples);
  for (int i = 0; i < opt.samples; ++i)
    sample.push_back(random_density(opt.sites, opt.n_cells, cfg.run.seed, i));
  std::vector<double> epsilons = opt.epsilons;
  if (epsilons.empty()) epsilons.push_back(cfg.epsilon);

  bool all_pass = true;
  json per_eps = json::array();
  double sigma = 0.0;
  for (double e : epsilons) {
    LYReport rep =
        verify_lasota_yorke(cfg.map, coupling_spec(cfg, e), geom, sample);
    sigma = rep.sigma;
    all_pass = all_pass && rep.pass;
    json r;
    r["epsilon"] = e;
    r["b_empirical"] = rep.B_empirical;
    r["pass"] = rep.pass;
    r["violating_index"] = rep.violating_index;
    if (!rep.message.empty()) r["message"] = rep.message;
    per_eps.push_back(r);
  }
  json results;
  results["sigma"] = sigma;
  results["samples"] = opt.samples;
  results["n_cells"] = opt.n_cells;
  results["pass"] = all_pass;
  results["per_epsilon"] = per_eps;
  files.push_back({"ly_report.json", summary_json("verify-ly", cfg, results)});
  return all_pass ? 0 : 2;
}

int cmd_verify_decouple(const ExperimentConfig& cfg,
                        std::vector<Staged>& files) {
  const DecoupleOptions& opt = cfg.verify_decouple;
  SmallGeometry geom = small_geometry(opt.sites, opt.arrangement);
  std::vector<GridDensity> sample;
  sample.reserve(opt.samples);
  for (int i = 0; i < opt.samples; ++i)
    sample.push_back(random_density(opt.sites, opt.n_cells, cfg.run.seed, i));
  std::vector<double> epsilons = opt.epsilons;
  if (epsilons.empty()) epsilons.push_back(cfg.epsilon);
  for (double e : epsilons)
    if (e <= 0.0)
      throw std::invalid_argument("verify-decouple needs epsilon > 0");

  bool all_pass = true;
  json per_eps = json::array();
  // per-density distances for the scaling fit
  std::vector<std::vector<double>> diffs(sample.size());
  for (double e : epsilons) {
    CollisionSpec spec = coupling_spec(cfg, e);
    DecoupleReport rep = verify_decoupling(spec, geom, opt.site, sample);
    all_pass = all_pass && rep.pass;
    json r;
    r["epsilon"] = e;
    r["bound_factor"] = rep.bound_factor;
    r["worst_ratio"] = rep.worst_ratio;
    r["pass"] = rep.pass;
    r["violating_index"] = rep.violating_index;
    if (!rep.message.empty()) r["message"] = rep.message;
    per_eps.push_back(r);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      GridDensity full = pushforward_phi(sample[i], spec, geom);
      GridDensity cut = pushforward_phi(sample[i], spec, geom, opt.site);
      for (int c = 0; c < cell_count(full); ++c) full.c[c] -= cut.c[c];
      full.probability = false;
      diffs[i].push_back(tv_norm(full));
    }
  }
  json slopes = json::array();
  double min_slope = 0.0;
  bool have_slopes = epsilons.size() >= 2;
  if (have_slopes) {
    min_slope = 1e300;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int m = static_cast<int>(epsilons.size());
      bool usable = true;
      for (int p = 0; p < m; ++p) {
        if (diffs[i][p] <= 0.0) {
          usable = false;
          break;
        }
        double lx = std::log(epsilons[p]);
        double ly = std::log(diffs[i][p]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
      if (!usable) {
        slopes.push_back(nullptr);
        continue;
      }
      double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      slopes.push_back(slope);
      min_slope = std::min(min_slope, slope);
    }
  }
  json results;
  results["samples"] = opt.samples;
  results["n_cells"] = opt.n_cells;
  results["site"] = opt.site;
  results["pass"] = all_pass;
  results["per_epsilon"] = per_eps;
  if (have_slopes) {
    results["scaling_slopes"] = slopes;
    results["min_scaling_slope"] = min_slope;
  }
  files.push_back(
      {"decouple_report.json", summary_json("verify-decouple", cfg, results)});
  return all_pass ? 0 : 2;
}

int cmd_correlations(const ExperimentConfig& cfg, std::vector<Staged>& files) {
  const CorrelationOptions& opt = cfg.correlations;
  TrajectorySource src = trajectory_source(cfg);
  std::vector<int> offsets;
  std::vector<CorrelationSeries> series;
  if (opt.mode == "time") {
    offsets = {0};
    series.push_back(time_correlation(src, opt.phi, opt.psi, opt.max_lag));
  } else {
    offsets = opt.offsets;
    series =
        space_time_correlation(src, opt.phi, opt.psi, opt.max_lag, offsets);
  }
  std::ostringstream csv;
  csv << "offset,lag,value,stderr\n";
  for (std::size_t oi = 0; oi < series.size(); ++oi)
    for (std::size_t l = 0; l < series[oi].lags.size(); ++l)
      csv << offsets[oi] << "," << series[oi].lags[l] << ","
          << csv_num(series[oi].values[l]) << ","
          << csv_num(series[oi].std_err[l]) << "\n";

  json fits = json::array();
  for (std::size_t oi = 0; oi < series.size(); ++oi) {
    ExpFit fit = fit_exponential(series[oi]);
    json f;
    f["offset"] = offsets[oi];
    f["ok"] = fit.ok;
    f["noise_floor"] = fit.noise_floor;
    if (fit.ok) {
      f["rate"] = fit.rate;
      f["intercept"] = fit.intercept;
      f["r_squared"] = fit.r_squared;
    } else {
      f["error"] = fit.error;
    }
    fits.push_back(f);
  }
  json results;
  results["mode"] = opt.mode;
  results["max_lag"] = opt.max_lag;
  results["n_samples"] = series.empty() ? 0 : series[0].n_samples;
  results["fits"] = fits;
  files.push_back({"series.csv", csv.str()});
  files.push_back(
      {"summary.json", summary_json("correlations", cfg, results)});
  return 0;
}

int cmd_hypothesis_check(const ExperimentConfig& cfg,
                         std::vector<Staged>& files, std::ostream& out) {
  double sigma = (4.0 + 4.0 * cfg.geometry.d) / cfg.map.lambda_min;
  CollisionSpec spec = coupling_spec(cfg);
  bool pass = sigma < 1.0;
  out << "sigma = " << sigma << "\n";
  out << "ell = " << spec.gap << "\n";
  if (pass)
    out << "pass\n";
  else
    out << "warn: σ ≥ 1: theorem hypotheses not satisfied\n";
  json results;
  results["sigma"] = sigma;
  results["ell"] = spec.gap;
  results["pass"] = pass;
  if (!pass)
    results["warning"] = "σ ≥ 1: theorem hypotheses not satisfied";
  files.push_back(
      {"hypothesis.json", summary_json("hypothesis-check", cfg, results)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled map lattice simulation and verification toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  int threads = 0;
  app.add_option("--config", config_path, "experiment config file (JSON)")
      ->required();
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt =
      app.add_option("--seed", seed_override, "override run.seed");
  app.add_option("--threads", threads, "worker thread count");

  CLI::App* sub_simulate =
      app.add_subcommand("simulate", "run a trajectory, report collisions");
  CLI::App* sub_ulam =
      app.add_subcommand("ulam", "discretized transfer operator and spectrum");
  CLI::App* sub_ly = app.add_subcommand(
      "verify-ly", "norm inequality checks on random densities");
  CLI::App* sub_dec = app.add_subcommand(
      "verify-decouple", "one-site decoupling distance checks");
  CLI::App* sub_corr =
      app.add_subcommand("correlations", "correlation series and decay fits");
  CLI::App* sub_hyp = app.add_subcommand(
      "hypothesis-check", "contraction and gap hypothesis report");
  for (CLI::App* s :
       {sub_simulate, sub_ulam, sub_ly, sub_dec, sub_corr, sub_hyp})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_opt->count() > 0) cfg.run.seed = seed_override;
    if (threads > 0) {
#ifdef _OPENMP
      omp_set_num_threads(threads);
#endif
    }
    bool needs_out = !sub_hyp->parsed();
    if (needs_out && out_dir.empty())
      throw ConfigError("config: --out directory is required");

    std::vector<Staged> files;
    int code = 0;
    if (sub_simulate->parsed())
      code = cmd_simulate(cfg, files);
    else if (sub_ulam->parsed())
      code = cmd_ulam(cfg, files);
    else if (sub_ly->parsed())
      code = cmd_verify_ly(cfg, files);
    else if (sub_dec->parsed())
      code = cmd_verify_decouple(cfg, files);
    else if (sub_corr->parsed())
      code = cmd_correlations(cfg, files);
    else if (sub_hyp->parsed())
      code = cmd_hypothesis_check(cfg, files, std::cout);

    // everything computed; only now touch the filesystem
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      for (const Staged& f : files) {
        std::ofstream os(std::filesystem::path(out_dir) / f.name,
                         std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + f.name);
        os << f.content;
      }
    }
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "cml/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "cml/rng.hpp"
#include "json.hpp"

namespace cml {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw ConfigError("config: " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) fail("unknown key " + path + "." + it.key());
  }
}

double get_num(const json& j, const std::string& path, const char* key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key + " must be a number");
  return v.get<double>();
}

long long get_int(const json& j, const std::string& path, const char* key,
                  long long fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(path + "." + key + " must be an integer");
  return v.get<long long>();
}

bool get_bool(const json& j, const std::string& path, const char* key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_num_list(const json& j, const std::string& path,
                                 const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key + " must be an array of numbers");
  for (const json& e : v) {
    if (!e.is_number()) fail(path + "." + key + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> get_int_list(const json& j, const std::string& path,
                              const char* key, std::vector<int> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key + " must be an array of integers");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer() && !e.is_number_unsigned())
      fail(path + "." + key + " must be an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

Observable parse_observable(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "support", "center", "width"});
  Observable obs;
  std::string kind = get_str(j, path, "kind", "centered_coordinate");
  if (kind == "coordinate")
    obs.kind = Observable::Kind::coordinate;
  else if (kind == "centered_coordinate")
    obs.kind = Observable::Kind::centered_coordinate;
  else if (kind == "smooth_bump")
    obs.kind = Observable::Kind::smooth_bump;
  else
    fail(path + ".kind must be coordinate, centered_coordinate or smooth_bump");
  obs.support = get_int_list(j, path, "support", {0});
  if (obs.support.empty()) fail(path + ".support must be nonempty");
  obs.center = get_num(j, path, "center", 0.5);
  obs.width = get_num(j, path, "width", 0.25);
  if (obs.kind == Observable::Kind::smooth_bump && obs.width <= 0.0)
    fail(path + ".width must be positive");
  return obs;
}

std::string arrangement_name(const json& j, const std::string& path) {
  std::string a = get_str(j, path, "arrangement", "torus");
  if (a != "torus" && a != "path")
    fail(path + ".arrangement must be torus or path");
  return a;
}

json observable_json(const Observable& obs) {
  json j;
  switch (obs.kind) {
    case Observable::Kind::coordinate:
      j["kind"] = "coordinate";
      break;
    case Observable::Kind::centered_coordinate:
      j["kind"] = "centered_coordinate";
      break;
    case Observable::Kind::smooth_bump:
      j["kind"] = "smooth_bump";
      j["center"] = obs.center;
      j["width"] = obs.width;
      break;
  }
  j["support"] = obs.support;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  check_keys(root, "<top>",
             {"map", "geometry", "coupling", "run", "simulate", "ulam",
              "verify_ly", "verify_decouple", "correlations"});
  ExperimentConfig cfg;

  if (root.contains("map")) {
    const json& m = root.at("map");
    check_keys(m, "map", {"preset", "branches"});
    if (m.contains("preset") && m.contains("branches"))
      fail("map.preset and map.branches are mutually exclusive");
    if (m.contains("branches")) {
      const json& bl = m.at("branches");
      if (!bl.is_array() || bl.empty())
        fail("map.branches must be a nonempty array");
      std::vector<Branch> branches;
      int bi = 0;
      for (const json& b : bl) {
        std::string path = "map.branches[" + std::to_string(bi++) + "]";
        check_keys(b, path, {"lo", "hi", "slope", "intercept"});
        Branch br;
        br.lo = get_num(b, path, "lo", 0.0);
        br.hi = get_num(b, path, "hi", 1.0);
        br.slope = get_num(b, path, "slope", 2.0);
        br.intercept = get_num(b, path, "intercept", 0.0);
        branches.push_back(br);
      }
      cfg.map_name = "custom";
      try {
        cfg.map = make_map(branches);
      } catch (const std::invalid_argument& e) {
        fail(std::string("map.branches invalid: ") + e.what());
      }
    } else {
      cfg.map_name = get_str(m, "map", "preset", "decimal");
    }
  }
  if (cfg.map_name != "custom") {
    try {
      cfg.map = preset_map(cfg.map_name);
    } catch (const std::invalid_argument& e) {
      fail(std::string("map.preset invalid: ") + e.what());
    }
  }

  {
    std::vector<int> sides = {64};
    long long d = 1;
    if (root.contains("geometry")) {
      const json& g = root.at("geometry");
      check_keys(g, "geometry", {"d", "sides"});
      sides = get_int_list(g, "geometry", "sides", {64});
      d = get_int(g, "geometry", "d", static_cast<long long>(sides.size()));
    }
    if (d != static_cast<long long>(sides.size()))
      fail("geometry.d must match the number of side lengths");
    try {
      cfg.geometry = make_geometry(static_cast<int>(d), sides);
    } catch (const std::invalid_argument& e) {
      fail(std::string("geometry invalid: ") + e.what());
    }
  }

  if (root.contains("coupling")) {
    const json& c = root.at("coupling");
    check_keys(c, "coupling", {"epsilon", "placement"});
    cfg.epsilon = get_num(c, "coupling", "epsilon", 0.0);
    if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0)
      fail("coupling.epsilon must lie in [0, 1)");
    if (c.contains("placement") && !c.at("placement").is_string()) {
      cfg.placement_lo = get_num_list(c, "coupling", "placement");
      if (static_cast<int>(cfg.placement_lo.size()) != 2 * cfg.geometry.d)
        fail("coupling.placement needs one window start per direction (2d "
             "values)");
      cfg.default_placement = false;
    } else if (get_str(c, "coupling", "placement", "default") != "default") {
      fail("coupling.placement must be \"default\" or an array of window "
           "starts");
    }
  }
  try {
    coupling_spec(cfg);
  } catch (const std::invalid_argument& e) {
    fail(std::string("coupling invalid: ") + e.what());
  }

  if (root.contains("run")) {
    const json& r = root.at("run");
    check_keys(r, "run", {"seed", "steps", "burn_in", "dither", "replicas"});
    if (r.contains("seed")) {
      const json& s = r.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() &&
                                       s.get<long long>() >= 0))
        fail("run.seed must be a nonnegative integer");
      cfg.run.seed = s.get<std::uint64_t>();
    }
    cfg.run.steps = get_int(r, "run", "steps", cfg.run.steps);
    cfg.run.burn_in = get_int(r, "run", "burn_in", cfg.run.burn_in);
    cfg.run.dither = get_num(r, "run", "dither", cfg.run.dither);
    cfg.run.replicas =
        static_cast<int>(get_int(r, "run", "replicas", cfg.run.replicas));
    if (cfg.run.steps < 1) fail("run.steps must be >= 1");
    if (cfg.run.burn_in < 0) fail("run.burn_in must be >= 0");
    if (cfg.run.dither < 0.0 || cfg.run.dither > 1e-6)
      fail("run.dither must lie in [0, 1e-6]");
    if (cfg.run.replicas < 1) fail("run.replicas must be >= 1");
  }

  if (root.contains("simulate")) {
    const json& s = root.at("simulate");
    check_keys(s, "simulate", {"record_collisions"});
    cfg.simulate.record_collisions =
        get_bool(s, "simulate", "record_collisions", false);
  }

  if (root.contains("ulam")) {
    const json& u = root.at("ulam");
    check_keys(u, "ulam",
               {"n_cells", "sites", "arrangement", "tol", "max_iter", "starts"});
    cfg.ulam.n_cells = static_cast<int>(get_int(u, "ulam", "n_cells", 20));
    cfg.ulam.sites = static_cast<int>(get_int(u, "ulam", "sites", 1));
    cfg.ulam.arrangement = arrangement_name(u, "ulam");
    cfg.ulam.tol = get_num(u, "ulam", "tol", 1e-10);
    cfg.ulam.max_iter = static_cast<int>(get_int(u, "ulam", "max_iter", 100000));
    cfg.ulam.starts = static_cast<int>(get_int(u, "ulam", "starts", 1));
    if (cfg.ulam.n_cells < 2) fail("ulam.n_cells must be >= 2");
    if (cfg.ulam.sites < 1 || cfg.ulam.sites > 3)
      fail("ulam.sites must be 1, 2 or 3");
    if (cfg.ulam.tol <= 0.0) fail("ulam.tol must be positive");
    if (cfg.ulam.max_iter < 1) fail("ulam.max_iter must be >= 1");
    if (cfg.ulam.starts < 1) fail("ulam.starts must be >= 1");
  }

  if (root.contains("verify_ly")) {
    const json& v = root.at("verify_ly");
    check_keys(v, "verify_ly",
               {"n_cells", "samples", "sites", "arrangement", "epsilons"});
    cfg.verify_ly.n_cells =
        static_cast<int>(get_int(v, "verify_ly", "n_cells", 20));
    cfg.verify_ly.samples =
        static_cast<int>(get_int(v, "verify_ly", "samples", 200));
    cfg.verify_ly.sites = static_cast<int>(get_int(v, "verify_ly", "sites", 2));
    cfg.verify_ly.arrangement = arrangement_name(v, "verify_ly");
    cfg.verify_ly.epsilons = get_num_list(v, "verify_ly", "epsilons");
    if (cfg.verify_ly.n_cells < 2) fail("verify_ly.n_cells must be >= 2");
    if (cfg.verify_ly.samples < 1) fail("verify_ly.samples must be >= 1");
    if (cfg.verify_ly.sites < 2 || cfg.verify_ly.sites > 3)
      fail("verify_ly.sites must be 2 or 3");
    for (double e : cfg.verify_ly.epsilons)
      if (e <= 0.0 || e >= 1.0) fail("verify_ly.epsilons must lie in (0, 1)");
  }

  if (root.contains("verify_decouple")) {
    const json& v = root.at("verify_decouple");
    check_keys(v, "verify_decouple",
               {"n_cells", "samples", "sites", "arrangement", "site",
                "epsilons"});
    cfg.verify_decouple.n_cells =
        static_cast<int>(get_int(v, "verify_decouple", "n_cells", 20));
    cfg.verify_decouple.samples =
        static_cast<int>(get_int(v, "verify_decouple", "samples", 20));
    cfg.verify_decouple.sites =
        static_cast<int>(get_int(v, "verify_decouple", "sites", 2));
    cfg.verify_decouple.arrangement = arrangement_name(v, "verify_decouple");
    cfg.verify_decouple.site =
        static_cast<int>(get_int(v, "verify_decouple", "site", 0));
    cfg.verify_decouple.epsilons = get_num_list(v, "verify_decouple", "epsilons");
    if (cfg.verify_decouple.n_cells < 2)
      fail("verify_decouple.n_cells must be >= 2");
    if (cfg.verify_decouple.samples < 1)
      fail("verify_decouple.samples must be >= 1");
    if (cfg.verify_decouple.sites < 2 || cfg.verify_decouple.sites > 3)
      fail("verify_decouple.sites must be 2 or 3");
    if (cfg.verify_decouple.site < 0 ||
        cfg.verify_decouple.site >= cfg.verify_decouple.sites)
      fail("verify_decouple.site must index a lattice site");
    for (double e : cfg.verify_decouple.epsilons)
      if (e <= 0.0 || e >= 1.0)
        fail("verify_decouple.epsilons must lie in (0, 1)");
  }

  if (root.contains("correlations")) {
    const json& c = root.at("correlations");
    check_keys(c, "correlations", {"mode", "phi", "psi", "max_lag", "offsets"});
    cfg.correlations.mode = get_str(c, "correlations", "mode", "time");
    if (cfg.correlations.mode != "time" &&
        cfg.correlations.mode != "space_time")
      fail("correlations.mode must be time or space_time");
    if (c.contains("phi"))
      cfg.correlations.phi = parse_observable(c.at("phi"), "correlations.phi");
    if (c.contains("psi"))
      cfg.correlations.psi = parse_observable(c.at("psi"), "correlations.psi");
    cfg.correlations.max_lag =
        static_cast<int>(get_int(c, "correlations", "max_lag", 5));
    cfg.correlations.offsets =
        get_int_list(c, "correlations", "offsets", {0});
    if (cfg.correlations.max_lag < 0)
      fail("correlations.max_lag must be >= 0");
    if (cfg.correlations.offsets.empty())
      fail("correlations.offsets must be nonempty");
    int side0 = cfg.geometry.sides[0];
    for (int j : cfg.correlations.offsets)
      if (j < 0 || j >= side0)
        fail("correlations.offsets must lie within the lattice");
    int n = n_sites(cfg.geometry);
    for (int s : cfg.correlations.phi.support)
      if (s < 0 || s >= n) fail("correlations.phi.support outside the lattice");
    for (int s : cfg.correlations.psi.support)
      if (s < 0 || s >= n) fail("correlations.psi.support outside the lattice");
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CollisionSpec coupling_spec(const ExperimentConfig& cfg, double epsilon) {
  if (epsilon == 0.0) return make_collision_spec(0.0, {});
  if (cfg.default_placement)
    return default_collision_spec(cfg.geometry.d, epsilon);
  std::vector<Interval> windows;
  for (double lo : cfg.placement_lo) windows.push_back({lo, lo + epsilon});
  return make_collision_spec(epsilon, windows);
}

SmallGeometry small_geometry(int sites, const std::string& arrangement) {
  SmallGeometry g;
  g.k = sites;
  g.arrangement = arrangement == "path" ? SmallGeometry::Arrangement::path
                                        : SmallGeometry::Arrangement::torus;
  return g;
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.map_name == "custom") {
    json bl = json::array();
    for (const Branch& b : cfg.map.branches)
      bl.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"slope", b.slope},
                    {"intercept", b.intercept}});
    j["map"]["branches"] = bl;
  } else {
    j["map"]["preset"] = cfg.map_name;
  }
  j["geometry"]["d"] = cfg.geometry.d;
  j["geometry"]["sides"] = cfg.geometry.sides;
  j["coupling"]["epsilon"] = cfg.epsilon;
  if (cfg.default_placement)
    j["coupling"]["placement"] = "default";
  else
    j["coupling"]["placement"] = cfg.placement_lo;
  j["run"] = {{"seed", cfg.run.seed},
              {"steps", cfg.run.steps},
              {"burn_in", cfg.run.burn_in},
              {"dither", cfg.run.dither},
              {"replicas", cfg.run.replicas}};
  j["simulate"] = {{"record_collisions", cfg.simulate.record_collisions}};
  j["ulam"] = {{"n_cells", cfg.ulam.n_cells},
               {"sites", cfg.ulam.sites},
               {"arrangement", cfg.ulam.arrangement},
               {"tol", cfg.ulam.tol},
               {"max_iter", cfg.ulam.max_iter},
               {"starts", cfg.ulam.starts}};
  j["verify_ly"] = {{"n_cells", cfg.verify_ly.n_cells},
                    {"samples", cfg.verify_ly.samples},
                    {"sites", cfg.verify_ly.sites},
                    {"arrangement", cfg.verify_ly.arrangement},
                    {"epsilons", cfg.verify_ly.epsilons}};
  j["verify_decouple"] = {{"n_cells", cfg.verify_decouple.n_cells},
                          {"samples", cfg.verify_decouple.samples},
                          {"sites", cfg.verify_decouple.sites},
                          {"arrangement", cfg.verify_decouple.arrangement},
                          {"site", cfg.verify_decouple.site},
                          {"epsilons", cfg.verify_decouple.epsilons}};
  j["correlations"] = {{"mode", cfg.correlations.mode},
                       {"phi", observable_json(cfg.correlations.phi)},
                       {"psi", observable_json(cfg.correlations.psi)},
                       {"max_lag", cfg.correlations.max_lag},
                       {"offsets", cfg.correlations.offsets}};
  return j.dump(2);
}

GridDensity random_density(int k, int n_cells, std::uint64_t seed, int index) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  long long dim = 1;
  for (int a = 0; a < k; ++a) dim *= n_cells;
  std::vector<double> c(dim);
  for (long long i = 0; i < dim; ++i) c[i] = rng.uniform(-1.0, 1.0);
  return make_density(k, n_cells, std::move(c), false);
}

}  // namespace cml

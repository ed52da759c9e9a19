#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "hpdpg/driver.hpp"

namespace hpdpg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "default") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return x;
}

long parse_int(const std::string& key, const std::string& v) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::string fmt(double x) {
  if (std::isnan(x)) return "default";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

} // namespace

const std::vector<std::string>& AdaptConfig::keys() {
  static const std::vector<std::string> k{
      "case",      "epsilon",  "alpha",   "center_x", "center_y",       "mode",       "growth",  "fixed_complexity",
      "max_adapt", "p_init",   "p_min",   "p_max",    "delta_p",        "hp",         "anisotropy", "patch",
      "remesher",  "remesh_command", "mesh_in", "init_cells", "out_dir", "threads", "seed",    "condense",
      "solver",    "cg_tol",   "beta_max", "raster", "calibrate"};
  return k;
}

void AdaptConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto as_int = [&] { return static_cast<int>(parse_int(key, v)); };
  if (key == "case") case_name = v;
  else if (key == "epsilon") epsilon = parse_double(key, v);
  else if (key == "alpha") alpha = parse_double(key, v);
  else if (key == "center_x") center.x = parse_double(key, v);
  else if (key == "center_y") center.y = parse_double(key, v);
  else if (key == "mode") {
    if (v == "energy") mode = AdaptMode::Energy;
    else if (v == "goal") mode = AdaptMode::Goal;
    else throw ConfigError("mode must be 'energy' or 'goal', got '" + v + "'");
  } else if (key == "growth") growth = parse_double(key, v);
  else if (key == "fixed_complexity") fixed_complexity = parse_double(key, v);
  else if (key == "max_adapt") max_adapt = as_int();
  else if (key == "p_init") p_init = as_int();
  else if (key == "p_min") p_min = as_int();
  else if (key == "p_max") p_max = as_int();
  else if (key == "delta_p") delta_p = as_int();
  else if (key == "hp") hp = parse_bool(key, v);
  else if (key == "anisotropy") anisotropic = parse_bool(key, v);
  else if (key == "patch") {
    if (v == "edge") patch = PatchAdjacency::Edge;
    else if (v == "vertex") patch = PatchAdjacency::Vertex;
    else throw ConfigError("patch must be 'edge' or 'vertex', got '" + v + "'");
  } else if (key == "remesher") remesher = v;
  else if (key == "remesh_command") remesh_command = v;
  else if (key == "mesh_in") mesh_in = v;
  else if (key == "init_cells") init_cells = as_int();
  else if (key == "out_dir") out_dir = v;
  else if (key == "threads") threads = as_int();
  else if (key == "seed") {
    const long s = parse_int(key, v);
    if (s < 0) throw ConfigError("seed must be non-negative");
    seed = static_cast<unsigned>(s);
  } else if (key == "condense") condense = parse_bool(key, v);
  else if (key == "solver") {
    if (v == "ldlt") solver = LinearSolver::SparseCholesky;
    else if (v == "cg") solver = LinearSolver::ConjugateGradient;
    else throw ConfigError("solver must be 'ldlt' or 'cg', got '" + v + "'");
  } else if (key == "cg_tol") cg_tolerance = parse_double(key, v);
  else if (key == "beta_max") beta_max = parse_double(key, v);
  else if (key == "raster") raster = as_int();
  else if (key == "calibrate") calibrate = parse_bool(key, v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

void AdaptConfig::validate() const {
  make_problem(case_name, {epsilon, alpha, center});
  if (fixed_complexity < 0.0) throw ConfigError("fixed_complexity must be non-negative");
  if (fixed_complexity == 0.0 && !(growth > 1.0)) throw ConfigError("growth must exceed 1 in growth mode");
  if (p_min < 1 || p_min > p_init || p_init > p_max) throw ConfigError("orders must satisfy 1 <= p_min <= p_init <= p_max");
  if (p_max > 12) throw ConfigError("p_max above 12 is not supported");
  if (delta_p < 1 || delta_p > 4) throw ConfigError("delta_p must lie in [1, 4]");
  if (max_adapt < 0) throw ConfigError("max_adapt must be non-negative");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (init_cells < 0) throw ConfigError("init_cells must be non-negative");
  if (remesher != "internal" && remesher != "external") throw ConfigError("remesher must be 'internal' or 'external'");
  if (!(cg_tolerance > 0.0)) throw ConfigError("cg_tol must be positive");
  if (!(beta_max >= 1.0)) throw ConfigError("beta_max must be at least 1");
  if (raster < 0 || raster == 1) throw ConfigError("raster must be 0 or at least 2");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

std::map<std::string, std::string> AdaptConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["case"] = case_name;
  m["epsilon"] = fmt(epsilon);
  m["alpha"] = fmt(alpha);
  m["center_x"] = fmt(center.x);
  m["center_y"] = fmt(center.y);
  m["mode"] = mode == AdaptMode::Goal ? "goal" : "energy";
  m["growth"] = fmt(growth);
  m["fixed_complexity"] = fmt(fixed_complexity);
  m["max_adapt"] = std::to_string(max_adapt);
  m["p_init"] = std::to_string(p_init);
  m["p_min"] = std::to_string(p_min);
  m["p_max"] = std::to_string(p_max);
  m["delta_p"] = std::to_string(delta_p);
  m["hp"] = hp ? "true" : "false";
  m["anisotropy"] = anisotropic ? "true" : "false";
  m["patch"] = patch == PatchAdjacency::Edge ? "edge" : "vertex";
  m["remesher"] = remesher;
  m["remesh_command"] = remesh_command;
  m["mesh_in"] = mesh_in;
  m["init_cells"] = std::to_string(init_cells);
  m["out_dir"] = out_dir;
  m["threads"] = std::to_string(threads);
  m["seed"] = std::to_string(seed);
  m["condense"] = condense ? "true" : "false";
  m["solver"] = solver == LinearSolver::SparseCholesky ? "ldlt" : "cg";
  m["cg_tol"] = fmt(cg_tolerance);
  m["beta_max"] = fmt(beta_max);
  m["raster"] = std::to_string(raster);
  m["calibrate"] = calibrate ? "true" : "false";
  return m;
}

AdaptConfig read_config(std::istream& in, AdaptConfig cfg) {
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key=value");
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return cfg;
}

AdaptConfig load_config(const std::string& path, AdaptConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return read_config(in, std::move(base));
}

} // namespace hpdpg

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpdpg/driver.hpp"

using namespace hpdpg;

namespace {

void replace_all(std::string& s, const std::string& what, const std::string& with) {
  for (std::size_t pos = 0; (pos = s.find(what, pos)) != std::string::npos; pos += with.size()) s.replace(pos, what.size(), with);
}

int run_command(const std::string& config_path, const std::map<std::string, std::string>& overrides) {
  AdaptConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  ExternalMesher mesher;
  if (cfg.remesher == "external") {
    if (cfg.remesh_command.empty()) throw ConfigError("remesher = external requires remesh_command");
    mesher = [cmd = cfg.remesh_command](const std::string& in, const std::string& out) {
      std::string c = cmd;
      replace_all(c, "{in}", in);
      replace_all(c, "{out}", out);
      if (std::system(c.c_str()) != 0) throw RemeshError("command failed: " + c);
    };
  }
  const RunResult r = run_adaptation(cfg, mesher);
  std::cout << std::setprecision(4);
  for (const auto& rec : r.records)
    std::cout << "iter " << rec.iteration << "  Ne " << rec.ne << "  ndof " << rec.ndof << "  p_avg " << rec.p_avg
              << "  energy " << rec.energy_error << "  L2 " << rec.l2_error
              << (std::isnan(rec.target_error) ? std::string() : "  |dJ| " + std::to_string(rec.target_error)) << '\n';
  std::cout << "output written to " << cfg.out_dir << '\n';
  return 0;
}

int report_command(const std::string& dir, const std::string& out_path) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir);
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what(), 0);
  }
  auto get = [](const nlohmann::json& j, const char* k) {
    const auto& v = j.at(k);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  std::vector<ConvergenceRecord> records;
  for (const auto& j : m.at("records")) {
    ConvergenceRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.ne = j.at("ne").get<int>();
    r.ndof = j.at("ndof").get<int>();
    r.cbrt_ndof = get(j, "cbrt_ndof");
    r.complexity = get(j, "complexity");
    r.p_avg = get(j, "p_avg");
    r.l2_error = get(j, "l2_error");
    r.energy_error = get(j, "energy_error");
    r.linf_error = get(j, "linf_error");
    r.h1_semi_error = get(j, "h1_semi_error");
    r.h1_error = get(j, "h1_error");
    r.target_error = get(j, "target_error");
    r.dwr = get(j, "dwr");
    records.push_back(r);
  }
  if (out_path.empty() || out_path == "-") {
    write_convergence_csv(std::cout, records);
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write " + out_path);
    write_convergence_csv(f, records);
  }
  if (records.size() >= 2) {
    std::vector<double> x, e;
    for (const auto& r : records)
      if (r.energy_error > 0.0) {
        x.push_back(r.cbrt_ndof);
        e.push_back(r.energy_error);
      }
    if (x.size() >= 2) {
      const ExponentialFit f = exponential_fit(x, e);
      std::cerr << "exponential fit of the energy error: b = " << f.b << ", R^2 = " << f.r2 << '\n';
    }
  }
  return 0;
}

int verify_command(int threads) {
  bool ok = true;
  for (const auto& item : verify_invariants(threads)) {
    std::cout << (item.pass ? "PASS  " : "FAIL  ") << item.name << "  (" << item.detail << ")\n";
    ok = ok && item.pass;
  }
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hp-adaptive ultra-weak DPG solver with anisotropic remeshing"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the adaptation loop");
  std::string config_path;
  run->add_option("config", config_path, "key=value configuration file");
  std::map<std::string, std::string> raw;
  for (const auto& key : AdaptConfig::keys()) {
    run->add_option_function<std::string>("--" + key, [&raw, key](const std::string& v) { raw[key] = v; },
                                          "override of the '" + key + "' key");
  }

  auto* report = app.add_subcommand("report", "re-emit convergence.csv from a run's manifest");
  std::string dir, out_path;
  report->add_option("--run", dir, "run output directory")->required();
  report->add_option("--out", out_path, "output file, stdout when omitted");

  auto* verify = app.add_subcommand("verify", "run the built-in invariant checks");
  int threads = 1;
  verify->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_command(config_path, raw);
    if (*report) return report_command(dir, out_path);
    if (*verify) return verify_command(threads);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const RemeshError& e) {
    std::cerr << "remesh failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

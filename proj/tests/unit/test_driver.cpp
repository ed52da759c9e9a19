#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hpdpg/driver.hpp"

using namespace hpdpg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("hpdpg_test_" + name);
  fs::remove_all(d);
  return d;
}

} // namespace

TEST_CASE("one record gives a header and one row") {
  ConvergenceRecord r;
  r.ndof = 1000;
  r.cbrt_ndof = std::cbrt(1000.0);
  std::ostringstream os;
  write_convergence_csv(os, {r});
  const std::string s = os.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}

TEST_CASE("convergence columns follow the record layout") {
  const std::vector<std::string> expected{"iteration",     "ne",       "ndof",         "cbrt_ndof", "complexity",
                                          "p_avg",         "l2_error", "energy_error", "linf_error",
                                          "h1_semi_error", "h1_error", "target_error", "dwr"};
  CHECK(convergence_columns() == expected);
}

TEST_CASE("convergence table round trip") {
  ConvergenceRecord a;
  a.iteration = 3;
  a.ne = 77;
  a.ndof = 1234;
  a.cbrt_ndof = std::cbrt(1234.0);
  a.energy_error = 1.0 / 3.0;
  a.dwr = 2.5e-9;
  std::stringstream ss;
  write_convergence_csv(ss, {a, a});
  const auto back = read_convergence_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].ndof == 1234);
  CHECK(back[1].energy_error == a.energy_error);
  CHECK(std::isnan(back[1].target_error));
  CHECK(back[1].dwr == a.dwr);

  std::istringstream bad("iteration,ne\n1,2\n");
  CHECK_THROWS_AS(read_convergence_csv(bad), ParseError);
}

TEST_CASE("config file and overrides") {
  std::istringstream in("# comment\ncase = lshape\nmode=energy\nfixed_complexity = 3072  # trailing\np_max=8\n");
  AdaptConfig c = read_config(in);
  CHECK(c.case_name == "lshape");
  CHECK(c.fixed_complexity == 3072.0);
  CHECK(c.p_max == 8);
  c.set("threads", "2");
  CHECK(c.threads == 2);
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_AS(c.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("p_max", "eight"), ConfigError);
  CHECK_THROWS_AS(c.set("mode", "fast"), ConfigError);
  std::istringstream broken("case lshape\n");
  CHECK_THROWS_AS(read_config(broken), ConfigError);

  AdaptConfig g;
  g.growth = 1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.fixed_complexity = 1000.0;
  CHECK_NOTHROW(g.validate());
  AdaptConfig p;
  p.p_init = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  AdaptConfig u;
  u.case_name = "nonexistent";
  CHECK_THROWS_AS(u.validate(), ConfigError);

  // Every key appears in the echo and can be set from its echoed value.
  const auto m = AdaptConfig{}.to_map();
  for (const auto& k : AdaptConfig::keys()) {
    REQUIRE(m.count(k) == 1);
    AdaptConfig x;
    CHECK_NOTHROW(x.set(k, m.at(k)));
  }
}

TEST_CASE("zero adaptations give the initial record") {
  AdaptConfig c;
  c.case_name = "boundary_layer";
  c.max_adapt = 0;
  c.out_dir = scratch_dir("zero").string();
  c.raster = 0;
  const RunResult r = run_adaptation(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].ne == 32);
  CHECK(r.records[0].ndof == 32 * 6);
  CHECK(r.records[0].cbrt_ndof == doctest::Approx(std::cbrt(192.0)).epsilon(1e-12));
  const std::string csv = slurp(fs::path(c.out_dir) / "convergence.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(fs::exists(fs::path(c.out_dir) / "mesh_0.mesh"));
  CHECK(fs::exists(fs::path(c.out_dir) / "pdist_0.csv"));
  CHECK(fs::exists(fs::path(c.out_dir) / "manifest.json"));
}

TEST_CASE("goal mode needs a target") {
  AdaptConfig c;
  c.case_name = "lshape";
  c.mode = AdaptMode::Goal;
  c.write_files = false;
  CHECK_THROWS_AS(run_adaptation(c), ConfigError);
}

TEST_CASE("adaptation is deterministic across thread counts") {
  AdaptConfig c;
  c.case_name = "boundary_layer";
  c.max_adapt = 2;
  c.raster = 0;
  const fs::path d1 = scratch_dir("det1");
  c.out_dir = d1.string();
  const RunResult a = run_adaptation(c);
  c.out_dir = scratch_dir("det2").string();
  c.threads = 3;
  run_adaptation(c);
  const std::string s1 = slurp(d1 / "convergence.csv");
  const std::string s2 = slurp(fs::path(c.out_dir) / "convergence.csv");
  CHECK(!s1.empty());
  CHECK(s1 == s2);
  REQUIRE(a.records.size() == 3);
  CHECK(a.records[2].energy_error < a.records[0].energy_error);
  for (const auto& r : a.records) CHECK(r.cbrt_ndof == doctest::Approx(std::cbrt(static_cast<double>(r.ndof))).epsilon(1e-12));
}

TEST_CASE("exponential fit recovers an exact exponential") {
  std::vector<double> x, e;
  for (int i = 0; i < 6; ++i) {
    x.push_back(5.0 + i);
    e.push_back(3.0 * std::exp(-0.7 * (5.0 + i)));
  }
  const ExponentialFit f = exponential_fit(x, e);
  CHECK(f.b == doctest::Approx(0.7));
  CHECK(f.log_c == doctest::Approx(std::log(3.0)));
  CHECK(f.r2 == doctest::Approx(1.0));
}

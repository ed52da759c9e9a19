#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hpdpg/hp_model.hpp"
#include "hpdpg/problems.hpp"

namespace hpdpg {

struct AdaptConfig {
  std::string case_name = "boundary_layer";
  double epsilon = std::numeric_limits<double>::quiet_NaN(); // NaN: case default
  double alpha = std::numeric_limits<double>::quiet_NaN();
  Vec2 center{0.99, 0.5};
  AdaptMode mode = AdaptMode::Energy;
  double growth = 1.30;
  double fixed_complexity = 0.0; // > 0 selects fixed-complexity mode
  int max_adapt = 10;
  int p_init = 2;
  int p_min = 1;
  int p_max = 10;
  int delta_p = 2;
  bool hp = true;         // false: keep p and adapt h only
  bool anisotropic = true;
  PatchAdjacency patch = PatchAdjacency::Edge;
  std::string remesher = "internal"; // internal | external
  std::string remesh_command;        // external: run with {in} and {out} prefixes
  std::string mesh_in;               // empty: built-in mesh of the case domain
  int init_cells = 0;                // 0: automatic
  std::string out_dir = "out";
  int threads = 1;
  unsigned seed = 0;
  bool condense = false;
  LinearSolver solver = LinearSolver::SparseCholesky;
  double cg_tolerance = 1e-12;
  double beta_max = 100.0;
  bool calibrate = true; // rescale the metric until the new mesh meets the complexity target
  int raster = 101; // raster resolution of the final solution dump, 0 disables
  bool write_files = true;

  /// Sets one key from its textual value; throws ConfigError.
  void set(const std::string& key, const std::string& value);
  /// Throws ConfigError when the configuration is inconsistent.
  void validate() const;
  /// key=value echo in a fixed order.
  std::map<std::string, std::string> to_map() const;
  static const std::vector<std::string>& keys();
};

/// Flat key=value file; '#' starts a comment.
AdaptConfig read_config(std::istream& in, AdaptConfig base = {});
AdaptConfig load_config(const std::string& path, AdaptConfig base = {});

struct ConvergenceRecord {
  int iteration = 0;
  int ne = 0;
  int ndof = 0; // scalar field dofs, sum of (p+1)(p+2)/2
  double cbrt_ndof = 0.0;
  double complexity = 0.0; // complexity target used to build this mesh
  double p_avg = 0.0;
  double l2_error = 0.0;
  double energy_error = 0.0;
  double linf_error = 0.0;
  double h1_semi_error = 0.0;
  double h1_error = 0.0;
  double target_error = std::numeric_limits<double>::quiet_NaN();
  double dwr = std::numeric_limits<double>::quiet_NaN();
};

const std::vector<std::string>& convergence_columns();
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_convergence_csv(std::istream& in);

/// Mesher hook for remesher = external: receives the prefix of the written
/// .mesh/.mtr pair and the prefix where the new .mesh must appear.
using ExternalMesher = std::function<void(const std::string& in_prefix, const std::string& out_prefix)>;

struct RunResult {
  std::vector<ConvergenceRecord> records;
  HpMesh final_mesh;
};

/// solve -> estimate -> (dual) -> select p -> anisotropy -> density -> metric
/// -> remesh -> transfer p, repeated. Records and dumps are flushed after every
/// iteration, so a failing stage leaves the partial history on disk.
RunResult run_adaptation(const AdaptConfig& config, const ExternalMesher& external = {});

/// Least-squares fit log(err) = log C - b cbrt(ndof).
struct ExponentialFit {
  double b = 0.0;
  double log_c = 0.0;
  double r2 = 0.0;
};
ExponentialFit exponential_fit(const std::vector<double>& cbrt_ndof, const std::vector<double>& error);

struct VerifyItem {
  std::string name;
  bool pass = false;
  std::string detail;
};
/// Quick invariant suite: exactness, estimator identity, interchange round trip,
/// density constraint.
std::vector<VerifyItem> verify_invariants(int threads = 1);

} // namespace hpdpg

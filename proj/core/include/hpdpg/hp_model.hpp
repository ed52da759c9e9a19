#pragma once

#include <array>
#include <vector>

#include "hpdpg/anisotropy.hpp"
#include "hpdpg/dpg.hpp"
#include "hpdpg/metric.hpp"

namespace hpdpg {

/// Complexity weight w(p) = 2(p+1)(p+2)/(3 sqrt 3); with the geometry constant
/// alpha = 3 sqrt 3 / 4 an element of density alpha/|k| costs (p+1)(p+2)/2.
double density_weight(int p);

/// Energy error of the center element of a patch solved at uniform order q with
/// Dirichlet data from the global trace (or the physical data on the domain
/// boundary). Throws when the patch problem cannot be set up at order q.
double solve_patch_at_order(const GlobalSolution& global, const Patch& patch, int q, const SolveOptions& options);

struct OrderSelection {
  int element = -1;
  int p_old = 0;
  std::array<int, 3> orders{};      // p-1, p, p+1
  std::array<bool, 3> available{};
  std::array<double, 3> energy{};
  std::array<double, 3> cost{};
  std::array<double, 3> m{};
  int p_opt = 0;
  double energy_opt = 0.0;
};

/// m_{p+i} = (E_{p+i}/E_p)^{2/(s_i+1)} N_{p+i}, s_i = p+i+1; argmin with ties to the lower order.
OrderSelection select_order(int p, const std::array<double, 3>& energy, const std::array<bool, 3>& available);

/// Patch solves at p-1, p, p+1 for every element followed by select_order.
std::vector<OrderSelection> select_orders(const GlobalSolution& global, const SolveOptions& options, int p_min, int p_max,
                                          PatchAdjacency adjacency = PatchAdjacency::Edge);

enum class AdaptMode { Energy, Goal };

/// Energy: E^2/|k|^{p+2}; goal: (eta* E)/|k|^{p+2}.
double compute_abar(AdaptMode mode, double energy, double star, double area, int p);

struct ContinuousModel {
  std::vector<double> abar;
  std::vector<double> area;
  std::vector<int> p;
  double n_target = 0.0;
};

/// Sum over elements with abar > 0 of |k| w(p) ((p+1) abar alpha^{p+1}/w)^{1/(p+2)} c^{-1/(p+2)}.
double model_complexity(const ContinuousModel& model, double c);

/// Solves model_complexity(c) = n_target minus the cost of the zero-error
/// elements, which keep their current density. Throws when every abar is zero.
double bisect_const(const ContinuousModel& model);

struct DensityField {
  std::vector<double> density;
  double constant = 0.0;
  double complexity = 0.0;
};

DensityField optimal_density(const ContinuousModel& model, double c);
DensityField compute_density(const ContinuousModel& model);

/// Element metrics composed from (theta*, beta*, d*).
std::vector<MetricTensor> element_metrics(const std::vector<double>& density, const std::vector<AnisotropyResult>& aniso);
/// Log-Euclidean mean of the adjacent element metrics at each vertex.
std::vector<MetricTensor> vertex_metrics(const Triangulation& mesh, const std::vector<MetricTensor>& element);

} // namespace hpdpg

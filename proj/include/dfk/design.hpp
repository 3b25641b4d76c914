#pragma once

// Gain-surface identification: turns an experiment record plus prior bounds
// into a scheduled state-feedback controller by L1-regularized inequality
// regression.  The control law is  u = K1(p) r_next - K2(p) x  with each gain
// entry a linear combination of the basis functions evaluated at p.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dfk/basis.hpp"
#include "dfk/dataset.hpp"
#include "dfk/estimate.hpp"
#include "dfk/linalg.hpp"
#include "dfk/lp.hpp"

namespace dfk {

struct Controller {
  BasisSet basis;
  std::size_t n_x = 0;
  // Flattened gain coefficients, length 2 * n_x * m: block 0 holds the
  // reference gain K1, block 1 the state gain K2; within a block, row l's
  // m basis weights are contiguous.  See flat_index.
  std::vector<double> coeffs;

  std::size_t coeff_count() const { return 2 * n_x * basis.m; }
  void validate() const;

  // k1 and k2 receive n_x gain entries each, evaluated at scheduling vector p.
  void gains(const double* p, double* k1, double* k2) const;
  // u = K1(p) . r_next - K2(p) . x
  double evaluate(const double* p, const double* r_next, const double* x) const;
};

// Position of coefficient (j, l, i) in the flattened vector: j selects the
// K1 (j=0) or K2 (j=1) block, l the state row, i the basis function.
inline std::size_t flat_index(std::size_t j, std::size_t l, std::size_t i,
                              std::size_t n_x, std::size_t m) {
  return j * (n_x * m) + l * m + i;
}

// Regression matrix: row k satisfies  Psi_k b = K1(p_k) x_{k+1} - K2(p_k) x_k
// for every flattened coefficient vector b.
Matrix build_psi(const LpvDataset& data, const BasisSet& basis);

struct NeighborSets {
  double zeta = 0.0;  // smallest radius giving every row a second member
  std::vector<std::vector<std::size_t>> sets;  // per row, sorted indices
};

// Rows are near when their (p_k, x_{k+1}) features are near in the Chebyshev
// norm; zeta is the largest nearest-neighbor distance over all rows.
NeighborSets neighbor_sets(const LpvDataset& data);

struct RegressionProblem {
  Matrix psi;
  std::vector<double> u;
  Matrix x;                // the L current-state rows, for pairwise bounds
  NeighborSets neighbors;
  double delta = 0.0;      // inequality half-width on reproducing the inputs
  double lambda2_s = 0.0;  // slope budget for the pairwise constraints

  void validate() const;
};

// Encodes  min ||b||_1  s.t.  |u - Psi b| <= delta  elementwise and, for each
// unordered neighbor pair (k, l),
//   |u_l - u_k + (Psi_k - Psi_l) b| <= lambda2_s ||x_l - x_k||_inf + 2 delta,
// with auxiliary epigraph variables realizing the L1 objective.
LinearProgram assemble_lp(const RegressionProblem& problem);

struct DesignOptions {
  double safety_margin = 0.8;        // lambda2_s = safety_margin / lambda_S
  double lambda2_s_override = 0.0;   // > 0 pins the slope budget directly
  double sparsity_threshold = 1e-6;  // relative to the largest coefficient
  LpOptions lp;
};

struct DesignReport {
  double zeta = 0.0;
  std::size_t rows = 0;        // total LP inequality rows
  std::size_t pairs = 0;       // deduplicated neighbor pairs
  std::size_t variables = 0;   // LP variables (coefficients + auxiliaries)
  double objective = 0.0;      // L1 norm attained
  std::size_t iterations = 0;
  std::string solver_status;
  std::size_t selected = 0;    // coefficients above the sparsity threshold
  double delta = 0.0;
  double lambda_S = 0.0;
  double lambda2_s = 0.0;
  double stability_product = 0.0;  // lambda2_s * lambda_S, must stay below 1
  bool stability_ok = false;

  std::string to_text() const;
};

std::pair<Controller, DesignReport> design_controller(const LpvDataset& data,
                                                      const BasisSet& basis,
                                                      const PriorBounds& priors,
                                                      const DesignOptions& opt = {});

// Smallest inequality half-width for which the fit constraints
// |u_k - Psi_k b| <= delta admit any coefficient vector at all: the minimax
// fit error of the recorded inputs over the basis-expanded regressors.
// Designs with delta below this floor are infeasible regardless of the slope
// budget; the pipeline uses it to keep the default delta feasible when the
// pairwise noise estimate underestimates the worst-case residual.
double chebyshev_fit_floor(const LpvDataset& data, const BasisSet& basis,
                           const LpOptions& opt = {});

// Number of coefficients with magnitude above threshold * max(1, max |coeff|).
std::size_t sparsity_count(const Controller& k, double threshold);

// Text round trip: basis block, state dimension, nonzero coefficients.
void save_controller(const Controller& k, const std::string& path);
Controller load_controller(const std::string& path);

}  // namespace dfk

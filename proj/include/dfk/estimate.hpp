#pragma once

// Data-driven estimation of the prior bounds the design stage consumes: the
// equation-error bound delta, the Lipschitz constant gamma of the target gain
// surface, the reference-to-state gain lambda_S, and the input-sensitivity
// bound lambda_B.  All estimators are deterministic pairwise/windowed scans.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dfk/dataset.hpp"

namespace dfk {

struct PriorBounds {
  double delta = 0.0;     // bound on the regression equation error
  double gamma = 0.0;     // Lipschitz constant of the target over w = (p, x+, x)
  double lambda_S = 0.0;  // reference-to-state gain estimate
  double lambda_B = 0.0;  // input-to-next-state sensitivity bound
  std::string provenance; // grids, windows, inflation factors used
};

// For each grid value gamma, the smallest equation-error bound consistent
// with every sample pair under a gamma-Lipschitz interpolant through
// w_k = (p_k, x_{k+1}, x_k):
//   delta_min(gamma) = max(0, max_{k<l} (|u_k - u_l| - gamma*||w_k - w_l||_inf)/2).
// The curve is nonincreasing and nonnegative.  Requires a single input column.
std::vector<std::pair<double, double>> validation_curve(
    const LpvDataset& data, const std::vector<double>& gamma_grid);

struct PriorSelection {
  double delta = 0.0;
  double gamma = 0.0;
  std::size_t knee_index = 0;
};

// Knee rule: the smallest grid value whose delta_min lies within 5% of the
// curve's value at the largest grid gamma; delta is inflated for safety.
PriorSelection select_priors(const std::vector<std::pair<double, double>>& curve,
                             double inflation);

// Geometric grid spanning the slope scales present in the data.  The base
// range comes from the per-step difference quotients along the record; the
// top is then extended until the pairwise-consistency curve's tail flattens
// at its asymptote (the noise floor for densely sampled records) or reaches
// zero (noiseless records), so the knee search always sees the full descent.
std::vector<double> default_gamma_grid(const LpvDataset& data, std::size_t count = 40);

// Windowed peak-gain ratio between the state sequence and its one-step-ahead
// copy (which plays the reference role in the design data), inflated by
// `inflation`.  Windows are consecutive non-overlapping blocks.
double estimate_lambda_S(const LpvDataset& data, std::size_t window = 50,
                         double inflation = 1.25);

// Difference-quotient bound on the next-state sensitivity to the input:
// max over pairs with ||(p,x)_k - (p,x)_l||_inf <= radius and u_k != u_l of
// ||x_{k+1} - x_{l+1}||_inf / |u_k - u_l|, inflated.  radius <= 0 selects a
// radius automatically (median nearest-neighbor distance, doubled until a
// qualifying pair exists).
double estimate_lambda_B(const LpvDataset& data, double radius = 0.0,
                         double inflation = 1.25);

struct EstimateOptions {
  double inflation = 1.25;       // applied to the knee's delta_min
  std::size_t grid_size = 40;
  std::size_t window = 50;       // lambda_S block length
  double lambda_b_radius = 0.0;  // 0 = automatic
};

// Full prior-estimation pass over one record.
PriorBounds estimate_priors(const LpvDataset& data, const EstimateOptions& opt = {});

}  // namespace dfk

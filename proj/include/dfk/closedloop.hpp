#pragma once

// Closed-loop simulation of designed controllers against continuous plants
// or synthetic discrete parameter-varying systems, reference generation,
// tracking metrics, and the analysis quantities used to check the tracking
// error bound and the gain-slope limit.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dfk/dataset.hpp"
#include "dfk/design.hpp"
#include "dfk/linalg.hpp"
#include "dfk/plant.hpp"

namespace dfk {

struct ReferenceSpec {
  enum class Kind { filtered_uniform, filtered_steps };
  Kind kind = Kind::filtered_uniform;
  double amplitude = 1.0;   // uniform half-width, or step level half-width
  double cutoff = 1.0;      // low-pass cutoff, rad/s
  double Ts = 0.1;          // sample period, seconds
  double dwell = 10.0;      // filtered_steps: seconds between new levels
  std::uint64_t seed = 0;
  // With the flag set (and an even channel count), the second half of the
  // channels carries the backward-difference derivative of the first half.
  bool derivative_channel = false;
};

// count rows by n_x columns.  Raw sequence (uniform noise or a staircase of
// levels) pushed through a critically damped second-order unity-DC low-pass
// discretized by the bilinear transform at spec.Ts.
Matrix generate_reference(const ReferenceSpec& spec, std::size_t count,
                          std::size_t n_x);

// Synthetic discrete system  x+ = A(p) x + B(p) u + H(p) e  with a single
// input channel, declared domain boxes, and p produced by a scheduling map.
struct KnownLpvSystem {
  std::size_t n_x = 0;
  std::size_t n_p = 0;
  std::size_t n_e = 0;
  std::function<Matrix(const double* p)> A;               // n_x x n_x
  std::function<std::vector<double>(const double* p)> B;  // n_x entries
  std::function<Matrix(const double* p)> H;               // n_x x n_e
  std::vector<double> p_lo, p_hi;
  std::vector<double> x_lo, x_hi;
  std::vector<double> e_lo, e_hi;

  void validate() const;
};

struct ClosedLoopRun {
  double Ts = 0.0;
  Matrix r;       // (T+1) x n_x reference
  Matrix x;       // (T+1) x n_x true state
  Matrix x_meas;  // T x n_x measured state (the one the controller saw)
  Matrix p;       // T x n_p scheduling samples
  Matrix u;       // T x n_u applied inputs
  std::vector<double> te;        // (T+1) tracking errors, max over channels
  std::vector<double> rms_error; // per channel over t = 1..T

  std::size_t steps() const { return u.rows; }
};

struct SimulateOptions {
  std::size_t substeps = 10;   // continuous plants: integrator steps per Ts
  double blowup = 1e9;         // divergence threshold on the state magnitude
};

// Runs the loop: measure, schedule, evaluate each controller for its input
// channel, hold the input over Ts (continuous plant) or step the recursion
// (synthetic system).  Zero initial state.  The reference must carry one row
// more than the number of steps; controllers see the next reference row.
// With an output_delay scheduling map the controllers run on the stacked
// (y_t, y_{t-1}) pair built from the first state channel, and their reference
// pair is (r_{t+1}, r_t) of that channel.
ClosedLoopRun simulate_closed_loop(const PlantModel& plant,
                                   const std::vector<Controller>& controllers,
                                   const Matrix& reference, const NoiseSpec& noise,
                                   double Ts, const SchedulingMap& scheduling,
                                   const SimulateOptions& opt = {});

ClosedLoopRun simulate_closed_loop(const KnownLpvSystem& sys,
                                   const std::vector<Controller>& controllers,
                                   const Matrix& reference, const NoiseSpec& noise,
                                   double Ts, const SchedulingMap& scheduling,
                                   const SimulateOptions& opt = {});

// Root mean square over the full sequence; throws ConfigError when empty.
double rms(const std::vector<double>& z);

// One-point inversion residual of controller k on the synthetic system:
//   || r - (A(p) - B(p) K2(p)) x - B(p) K1(p) r - H(p) e ||_inf.
double inversion_error(const KnownLpvSystem& sys, const Controller& k,
                       const double* p, const double* r, const double* x,
                       const double* e);

// Max of inversion_error over a uniform grid of the declared boxes with
// `density` points per dimension (r and x each range over the state box).
double global_inversion_error(const KnownLpvSystem& sys, const Controller& k,
                              std::size_t density);

// Max over a p-grid of the 1-norm gap between the two state-gain rows.
double lambda2_grid(const Controller& ka, const Controller& kb,
                    const std::vector<double>& p_lo,
                    const std::vector<double>& p_hi, std::size_t density);

struct TrackingBoundReport {
  std::vector<double> margin;  // per step t = 1..T: bound_t - te_t
  double min_margin = 0.0;
  std::size_t argmin = 0;      // step index achieving the minimum
};

// Checks, on a run produced with k_hat, that each tracking error stays below
// the inversion residual of the reference controller plus lambda_B times the
// input gap between the two controllers at the previous step.
TrackingBoundReport verify_tracking_bound(const KnownLpvSystem& sys,
                                          const Controller& k_oracle,
                                          const Controller& k_hat,
                                          const ClosedLoopRun& run,
                                          double lambda_B);

// Per-trial outcome of one acquire-estimate-design-simulate cycle.
struct TrialResult {
  bool diverged = false;
  std::size_t divergence_step = 0;
  std::vector<double> rms_error;  // empty when diverged
  std::size_t selected = 0;       // coefficients kept by the design
};

struct MonteCarloSummary {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::vector<double> mean_rms;  // over non-divergent trials
  double mean_selected = 0.0;    // over non-divergent trials
  std::vector<TrialResult> per_trial;

  std::string to_text() const;
};

// Runs trial_fn(trial_index) for indices 0..n_trials-1 and aggregates.
// Divergent trials count as failures and stay out of the means.
MonteCarloSummary monte_carlo(std::size_t n_trials,
                              const std::function<TrialResult(std::size_t)>& trial_fn);

// CSV dump `t, r_1..r_nx, x_1..x_nx, u_1..u_nu, TE`; the final row carries
// the trailing reference/state/error sample with the input fields blank.
void write_run_csv(const ClosedLoopRun& run, const std::string& path);

}  // namespace dfk

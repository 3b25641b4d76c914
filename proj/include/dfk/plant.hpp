#pragma once

// Continuous-time test plants, fixed-step integration with zero-order-hold
// inputs, excitation signals, and noisy data acquisition.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dfk/dataset.hpp"
#include "dfk/linalg.hpp"

namespace dfk {

struct PlantModel {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  std::map<std::string, double> params;
  // dxdt = f(x, u, t); must fill state_dim entries.
  std::function<void(const double* x, const double* u, double t, double* dxdt)> dynamics;
};

// x1' = x2, x2' = -alpha1 x1 - alpha2 x1^3 - beta x2 + u
void duffing_dynamics(const double* x, double u, double alpha1, double alpha2,
                      double beta, double* dxdt);
PlantModel duffing_plant(double alpha1 = -1.0, double alpha2 = 1.0, double beta = 0.2);

// Planar two-link arm, point masses at the link ends, angles measured from
// the straight-down vertical, zero joint friction.  State (q1, q2, q1', q2'),
// input (joint torques).
void two_link_dynamics(const double* z, const double* u, double l1, double l2,
                       double m1, double m2, double g, double* dzdt);
PlantModel two_link_plant(double l1 = 0.8, double l2 = 0.7, double m1 = 2.5,
                          double m2 = 2.0, double g = 9.81);

// x' = a x + b u: scalar linear fixture for exact-inverse and sanity checks.
PlantModel scalar_linear_plant(double a, double b);

// One classical 4th-order Runge-Kutta step with the input held constant.
void rk4_step(const PlantModel& model, double* x, const double* u, double t, double dt);

// Integrate from x0 to t_end with step dt; the input signal is sampled at the
// start of each step and held (zero-order hold at the dt grid).  Returns all
// states including x0 (round(t_end/dt) + 1 rows).
Matrix integrate_rk4(const PlantModel& model, const std::vector<double>& x0,
                     const std::function<void(double t, double* u)>& u_of_t,
                     double t_end, double dt);

struct Excitation {
  enum class Kind { zero, sine, sine_plus_noise, uniform_random, two_tone_windowed };
  Kind kind = Kind::zero;
  double amplitude = 0.0;
  double omega = 1.0;       // sine kinds, rad/s
  double noise_std = 0.0;   // sine_plus_noise extra white gaussian term
  std::uint64_t seed = 0;   // random kinds
  double Ts = 0.0;          // sample period; random kinds and window checks

  // two_tone_windowed: per input channel j the signal is
  //   amplitude*(sin(tones[2j] t) + sin(tones[2j+1] t)),
  // zeroed while the sample index lies in a quiet window, and overridden by
  // recovery_gain * z_j whenever |z_j| >= recovery_threshold.
  std::vector<double> tones;
  double recovery_threshold = 0.0;  // 0 disables the recovery branch
  double recovery_gain = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> quiet_windows;  // (lo, hi]: lo < k <= hi
};

// Evaluate the excitation at time tau (seconds) given the current state; the
// sample index used for windowing/randomness is round(tau / Ts).
void excitation_signal(const Excitation& spec, double tau, const double* z,
                       std::size_t n_u, double* u_out);

// Simulate the plant for L steps of Ts (inner step Ts/substeps), sample
// states and inputs, apply measurement noise, and build the scheduling
// samples p_k = map(x_k).  Stores L+1 state samples.
LpvDataset acquire_dataset(const PlantModel& model, const Excitation& excitation,
                           double Ts, std::size_t L,
                           const std::vector<double>& x0,
                           const NoiseSpec& state_noise, const NoiseSpec& input_noise,
                           const SchedulingMap& scheduling, std::size_t substeps = 10);

}  // namespace dfk

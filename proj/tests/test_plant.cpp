#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dfk/errors.hpp"
#include "dfk/plant.hpp"
#include "support/oracles.hpp"

using namespace dfk;

namespace {

PlantModel linear_oscillator() {
  PlantModel m;
  m.name = "oscillator";
  m.state_dim = 2;
  m.input_dim = 1;
  m.dynamics = [](const double* x, const double* u, double, double* d) {
    d[0] = x[1];
    d[1] = -x[0] + u[0];
  };
  return m;
}

}  // namespace

TEST_SUITE("plant") {

TEST_CASE("duffing derivative matches hand substitution") {
  double d[2];
  duffing_dynamics((const double[]){0.0, 0.0}, 0.0, 1.0, -1.0, 0.2, d);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  duffing_dynamics((const double[]){1.0, 0.0}, 0.0, 1.0, -1.0, 0.2, d);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(0.0));  // -1 + 1 - 0
  duffing_dynamics((const double[]){1.0, 1.0}, 0.0, 1.0, -1.0, 0.2, d);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == doctest::Approx(-0.2));
}

TEST_CASE("oscillator returns to start after one period within 1e-6") {
  auto model = linear_oscillator();
  auto zero_u = [](double, double* u) { u[0] = 0.0; };
  auto traj = integrate_rk4(model, {1.0, 0.0}, zero_u, 2.0 * M_PI, 1e-3);
  const std::size_t last = traj.rows - 1;
  CHECK(std::fabs(traj(last, 0) - 1.0) < 1e-6);
  CHECK(std::fabs(traj(last, 1) - 0.0) < 1e-6);
}

TEST_CASE("rk4 convergence order: halving dt cuts the error by 12x-20x") {
  auto model = linear_oscillator();
  auto zero_u = [](double, double* u) { u[0] = 0.0; };
  auto error_at = [&](double dt) {
    auto traj = integrate_rk4(model, {1.0, 0.0}, zero_u, 2.0 * M_PI, dt);
    const std::size_t last = traj.rows - 1;
    // dt divides the horizon only approximately; compare against the exact
    // solution at the reached time.
    const double t = static_cast<double>(last) * dt;
    const double e0 = traj(last, 0) - std::cos(t);
    const double e1 = traj(last, 1) + std::sin(t);
    return std::sqrt(e0 * e0 + e1 * e1);
  };
  const double coarse = error_at(2.0 * M_PI / 100.0);
  const double fine = error_at(2.0 * M_PI / 200.0);
  const double ratio = coarse / fine;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("equilibrium stays put") {
  auto model = duffing_plant();
  auto zero_u = [](double, double* u) { u[0] = 0.0; };
  auto traj = integrate_rk4(model, {0.0, 0.0}, zero_u, 1.0, 0.01);
  for (std::size_t k = 0; k < traj.rows; ++k) {
    CHECK(traj(k, 0) == 0.0);
    CHECK(traj(k, 1) == 0.0);
  }
}

TEST_CASE("driven duffing stays bounded over 200 s") {
  auto model = duffing_plant(-1.0, 1.0, 0.2);
  auto u_of_t = [](double t, double* u) { u[0] = 0.4 * std::sin(t); };
  auto traj = integrate_rk4(model, {0.0, 0.0}, u_of_t, 200.0, 0.01);
  double peak = 0.0;
  for (double v : traj.data) peak = std::max(peak, std::fabs(v));
  CHECK(peak < 10.0);
  CHECK(peak > 0.1);  // actually moves
}

TEST_CASE("zero-order hold: function input equals held-sample input") {
  auto model = duffing_plant();
  // Piecewise-constant input changing every 0.1 s.
  auto steps_fn = [](double t, double* u) {
    const auto k = static_cast<long>(std::floor(t / 0.1 + 1e-12));
    u[0] = 0.3 * std::sin(0.7 * static_cast<double>(k));
  };
  auto traj_a = integrate_rk4(model, {0.1, -0.2}, steps_fn, 5.0, 0.1);

  // Same input supplied per 0.1 s step, integrated manually with rk4_step.
  std::vector<double> x = {0.1, -0.2};
  for (std::size_t k = 0; k < 50; ++k) {
    double u = 0.3 * std::sin(0.7 * static_cast<double>(k));
    rk4_step(model, x.data(), &u, static_cast<double>(k) * 0.1, 0.1);
  }
  const std::size_t last = traj_a.rows - 1;
  CHECK(traj_a(last, 0) == x[0]);
  CHECK(traj_a(last, 1) == x[1]);
}

TEST_CASE("two-link: forced equilibrium at straight-down with zero torque") {
  double z[4] = {0.0, 0.0, 0.0, 0.0};
  double u[2] = {0.0, 0.0};  // gravity torque vanishes straight down
  double d[4];
  two_link_dynamics(z, u, 0.8, 0.7, 2.5, 2.0, 9.81, d);
  for (double v : d) CHECK(v == 0.0);
}

TEST_CASE("two-link: zero gravity plus zero velocity gives zero derivative") {
  double z[4] = {0.9, -1.3, 0.0, 0.0};
  double u[2] = {0.0, 0.0};
  double d[4];
  two_link_dynamics(z, u, 0.8, 0.7, 2.5, 2.0, 0.0, d);
  for (double v : d) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two-link: unforced energy drift below 1e-4 relative over 1 s") {
  const double l1 = 0.8, l2 = 0.7, m1 = 2.5, m2 = 2.0, g = 9.81;
  auto model = two_link_plant(l1, l2, m1, m2, g);
  auto zero_u = [](double, double* u) { u[0] = u[1] = 0.0; };
  std::vector<double> z0 = {1.2, -0.6, 0.0, 0.0};
  auto traj = integrate_rk4(model, z0, zero_u, 1.0, 1e-4);
  const double e0 = oracle::two_link_energy(z0.data(), l1, l2, m1, m2, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.rows; ++k) {
    const double e = oracle::two_link_energy(traj.row(k), l1, l2, m1, m2, g);
    worst = std::max(worst, std::fabs(e - e0));
  }
  CHECK(worst / std::fabs(e0) < 1e-4);
}

TEST_CASE("excitation: recovery feedback, quiet windows, two tones") {
  Excitation exc;
  exc.kind = Excitation::Kind::two_tone_windowed;
  exc.amplitude = 100.0;
  exc.tones = {0.07, 0.8, 0.08, 0.9};
  exc.recovery_threshold = 1.75;
  exc.recovery_gain = -20.0;
  exc.Ts = 0.02;
  exc.quiet_windows = {{500, 1000}, {1500, 2000}, {2500, 3000}, {3500, 4000}};

  double u[2];
  // Recovery branch dominates everything else.
  double z_big[4] = {2.0, 0.1, 0.0, 0.0};
  excitation_signal(exc, 600 * 0.02, z_big, 2, u);
  CHECK(u[0] == doctest::Approx(-40.0));
  CHECK(u[1] == 0.0);  // inside quiet window, |z_2| small

  // Quiet window zeroes the tone.
  double z_small[4] = {0.1, 0.1, 0.0, 0.0};
  excitation_signal(exc, 600 * 0.02, z_small, 2, u);
  CHECK(u[0] == 0.0);
  CHECK(u[1] == 0.0);

  // Outside windows: two-tone sum; at tau = 0 both sines vanish.
  excitation_signal(exc, 0.0, z_small, 2, u);
  CHECK(u[0] == 0.0);
  CHECK(u[1] == 0.0);
  const double tau = 100 * 0.02;
  excitation_signal(exc, tau, z_small, 2, u);
  CHECK(u[0] == doctest::Approx(100.0 * (std::sin(0.07 * tau) + std::sin(0.8 * tau))));
  CHECK(u[1] == doctest::Approx(100.0 * (std::sin(0.08 * tau) + std::sin(0.9 * tau))));

  // Window boundaries: sample 500 is outside (lo, hi], sample 501 inside,
  // sample 1000 inside, sample 1001 outside.
  excitation_signal(exc, 501 * 0.02, z_small, 2, u);
  CHECK(u[0] == 0.0);
  excitation_signal(exc, 1000 * 0.02, z_small, 2, u);
  CHECK(u[0] == 0.0);
  excitation_signal(exc, 1001 * 0.02, z_small, 2, u);
  CHECK(u[0] != 0.0);
}

TEST_CASE("acquisition without noise stores exact integrator samples") {
  auto model = duffing_plant();
  Excitation exc;
  exc.kind = Excitation::Kind::sine;
  exc.amplitude = 0.4;
  exc.omega = 1.0;
  NoiseSpec none;
  SchedulingMap identity;
  auto data = acquire_dataset(model, exc, 0.1, 50, {0.0, 0.0}, none, none, identity);
  CHECK(data.L == 50);
  CHECK(data.x.rows == 51);
  CHECK(data.n_p() == 2);

  // Re-integrate manually and compare bit-for-bit.
  std::vector<double> x = {0.0, 0.0};
  for (std::size_t k = 0; k < 50; ++k) {
    for (std::size_t j = 0; j < 2; ++j) CHECK(data.x(k, j) == x[j]);
    for (std::size_t j = 0; j < 2; ++j) CHECK(data.p(k, j) == x[j]);
    double u = 0.4 * std::sin(0.1 * static_cast<double>(k));
    CHECK(data.u(k, 0) == u);
    for (std::size_t s = 0; s < 10; ++s)
      rk4_step(model, x.data(), &u, 0.1 * static_cast<double>(k) + 0.01 * s, 0.01);
  }
  for (std::size_t j = 0; j < 2; ++j) CHECK(data.x(50, j) == x[j]);
}

TEST_CASE("gaussian-ratio noise lands near the requested ratio") {
  auto model = duffing_plant();
  Excitation exc;
  exc.kind = Excitation::Kind::sine;
  exc.amplitude = 0.4;
  exc.omega = 1.0;
  NoiseSpec clean;
  SchedulingMap identity;
  auto truth = acquire_dataset(model, exc, 0.1, 2000, {0.0, 0.0}, clean, clean, identity);

  NoiseSpec noisy;
  noisy.kind = NoiseSpec::Kind::gaussian_ratio;
  noisy.level = 0.05;
  noisy.seed = 7;
  auto data = acquire_dataset(model, exc, 0.1, 2000, {0.0, 0.0}, noisy, clean, identity);

  for (std::size_t c = 0; c < 2; ++c) {
    double mean_sig = 0.0, mean_noise = 0.0;
    for (std::size_t k = 0; k <= 2000; ++k) mean_sig += truth.x(k, c);
    mean_sig /= 2001.0;
    std::vector<double> diff(2001);
    for (std::size_t k = 0; k <= 2000; ++k) diff[k] = data.x(k, c) - truth.x(k, c);
    for (double v : diff) mean_noise += v;
    mean_noise /= 2001.0;
    double var_sig = 0.0, var_noise = 0.0;
    for (std::size_t k = 0; k <= 2000; ++k) {
      var_sig += (truth.x(k, c) - mean_sig) * (truth.x(k, c) - mean_sig);
      var_noise += (diff[k] - mean_noise) * (diff[k] - mean_noise);
    }
    const double ratio = std::sqrt(var_noise / var_sig);
    CHECK(ratio > 0.04);
    CHECK(ratio < 0.06);
  }
}

TEST_CASE("identical seeds give bit-identical datasets") {
  auto model = duffing_plant();
  Excitation exc;
  exc.kind = Excitation::Kind::sine;
  exc.amplitude = 0.4;
  exc.omega = 1.0;
  NoiseSpec noisy;
  noisy.kind = NoiseSpec::Kind::gaussian_ratio;
  noisy.level = 0.05;
  noisy.seed = 42;
  NoiseSpec none;
  SchedulingMap identity;
  auto a = acquire_dataset(model, exc, 0.1, 100, {0.0, 0.0}, noisy, none, identity);
  auto b = acquire_dataset(model, exc, 0.1, 100, {0.0, 0.0}, noisy, none, identity);
  CHECK(a.x.data == b.x.data);
  CHECK(a.u.data == b.u.data);
  CHECK(a.p.data == b.p.data);
}

TEST_CASE("divergence raises a structured error naming the step") {
  PlantModel runaway;
  runaway.name = "runaway";
  runaway.state_dim = 1;
  runaway.input_dim = 1;
  runaway.dynamics = [](const double* x, const double*, double, double* d) {
    d[0] = x[0] * x[0];  // finite-time blow-up from x0 > 0
  };
  auto unit_u = [](double, double* u) { u[0] = 0.0; };
  CHECK_THROWS_AS(integrate_rk4(runaway, {5.0, }, unit_u, 10.0, 0.05), DivergenceError);
}

}  // TEST_SUITE

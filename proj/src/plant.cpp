#include "dfk/plant.hpp"

#include <cmath>

#include "dfk/errors.hpp"
#include "dfk/rng.hpp"

namespace dfk {

namespace {

constexpr double kStateBlowup = 1e9;

void check_finite(const double* x, std::size_t n, std::size_t step) {
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(x[j]) || std::fabs(x[j]) > kStateBlowup)
      throw DivergenceError(
          "state diverged at integration step " + std::to_string(step), step);
}

}  // namespace

void duffing_dynamics(const double* x, double u, double alpha1, double alpha2,
                      double beta, double* dxdt) {
  dxdt[0] = x[1];
  dxdt[1] = -alpha1 * x[0] - alpha2 * x[0] * x[0] * x[0] - beta * x[1] + u;
}

PlantModel duffing_plant(double alpha1, double alpha2, double beta) {
  PlantModel model;
  model.name = "duffing";
  model.state_dim = 2;
  model.input_dim = 1;
  model.params = {{"alpha1", alpha1}, {"alpha2", alpha2}, {"beta", beta}};
  model.dynamics = [alpha1, alpha2, beta](const double* x, const double* u, double,
                                          double* dxdt) {
    duffing_dynamics(x, u[0], alpha1, alpha2, beta, dxdt);
  };
  return model;
}

void two_link_dynamics(const double* z, const double* u, double l1, double l2,
                       double m1, double m2, double g, double* dzdt) {
  const double q2 = z[1];
  const double w1 = z[2];
  const double w2 = z[3];
  const double c2 = std::cos(q2);
  const double s2 = std::sin(q2);

  // Mass matrix (point masses at the link ends).
  const double m11 = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * c2;
  const double m12 = m2 * l2 * l2 + m2 * l1 * l2 * c2;
  const double m22 = m2 * l2 * l2;

  // Centrifugal/Coriolis torques.
  const double h = m2 * l1 * l2 * s2;
  const double c_1 = -h * (2.0 * w1 * w2 + w2 * w2);
  const double c_2 = h * w1 * w1;

  // Gravity torques, angles measured from the straight-down vertical.
  const double s1 = std::sin(z[0]);
  const double s12 = std::sin(z[0] + q2);
  const double g1 = (m1 + m2) * g * l1 * s1 + m2 * g * l2 * s12;
  const double g2 = m2 * g * l2 * s12;

  // M qdd = u - c - G; 2x2 solve.  det = m2 l1^2 l2^2 (m1 + m2 s2^2) > 0.
  const double r1 = u[0] - c_1 - g1;
  const double r2 = u[1] - c_2 - g2;
  const double det = m11 * m22 - m12 * m12;
  dzdt[0] = w1;
  dzdt[1] = w2;
  dzdt[2] = (m22 * r1 - m12 * r2) / det;
  dzdt[3] = (m11 * r2 - m12 * r1) / det;
}

PlantModel two_link_plant(double l1, double l2, double m1, double m2, double g) {
  PlantModel model;
  model.name = "two-link";
  model.state_dim = 4;
  model.input_dim = 2;
  model.params = {{"l1", l1}, {"l2", l2}, {"m1", m1}, {"m2", m2}, {"g", g}};
  model.dynamics = [l1, l2, m1, m2, g](const double* z, const double* u, double,
                                       double* dzdt) {
    two_link_dynamics(z, u, l1, l2, m1, m2, g, dzdt);
  };
  return model;
}

PlantModel scalar_linear_plant(double a, double b) {
  PlantModel model;
  model.name = "linear";
  model.state_dim = 1;
  model.input_dim = 1;
  model.params = {{"a", a}, {"b", b}};
  model.dynamics = [a, b](const double* x, const double* u, double,
                          double* dxdt) { dxdt[0] = a * x[0] + b * u[0]; };
  return model;
}

void rk4_step(const PlantModel& model, double* x, const double* u, double t, double dt) {
  const std::size_t n = model.state_dim;
  thread_local std::vector<double> work;
  work.assign(5 * n, 0.0);
  double* k1 = work.data();
  double* k2 = k1 + n;
  double* k3 = k2 + n;
  double* k4 = k3 + n;
  double* xs = k4 + n;

  model.dynamics(x, u, t, k1);
  for (std::size_t j = 0; j < n; ++j) xs[j] = x[j] + 0.5 * dt * k1[j];
  model.dynamics(xs, u, t + 0.5 * dt, k2);
  for (std::size_t j = 0; j < n; ++j) xs[j] = x[j] + 0.5 * dt * k2[j];
  model.dynamics(xs, u, t + 0.5 * dt, k3);
  for (std::size_t j = 0; j < n; ++j) xs[j] = x[j] + dt * k3[j];
  model.dynamics(xs, u, t + dt, k4);
  for (std::size_t j = 0; j < n; ++j)
    x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
}

Matrix integrate_rk4(const PlantModel& model, const std::vector<double>& x0,
                     const std::function<void(double t, double* u)>& u_of_t,
                     double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= dt)) throw ConfigError("integrate_rk4: need 0 < dt <= t_end");
  if (x0.size() != model.state_dim) throw ConfigError("integrate_rk4: x0 dimension mismatch");
  check_finite(x0.data(), x0.size(), 0);

  // Use equal steps that land exactly on t_end (dt is honored to within the
  // rounding needed to make t_end an integer number of steps).
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_end / dt)));
  const double dt_eff = t_end / static_cast<double>(steps);
  Matrix traj(steps + 1, model.state_dim);
  std::vector<double> x = x0;
  std::vector<double> u(model.input_dim, 0.0);
  for (std::size_t j = 0; j < model.state_dim; ++j) traj(0, j) = x[j];
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt_eff;
    u_of_t(t, u.data());
    rk4_step(model, x.data(), u.data(), t, dt_eff);
    check_finite(x.data(), x.size(), k + 1);
    for (std::size_t j = 0; j < model.state_dim; ++j) traj(k + 1, j) = x[j];
  }
  return traj;
}

void excitation_signal(const Excitation& spec, double tau, const double* z,
                       std::size_t n_u, double* u_out) {
  switch (spec.kind) {
    case Excitation::Kind::zero:
      for (std::size_t j = 0; j < n_u; ++j) u_out[j] = 0.0;
      return;
    case Excitation::Kind::sine:
      for (std::size_t j = 0; j < n_u; ++j)
        u_out[j] = spec.amplitude * std::sin(spec.omega * tau);
      return;
    case Excitation::Kind::sine_plus_noise: {
      const auto k = static_cast<std::uint64_t>(std::llround(tau / spec.Ts));
      for (std::size_t j = 0; j < n_u; ++j) {
        auto rng = make_engine(spec.seed, (j << 40) ^ k);
        std::normal_distribution<double> d(0.0, spec.noise_std);
        u_out[j] = spec.amplitude * std::sin(spec.omega * tau) + d(rng);
      }
      return;
    }
    case Excitation::Kind::uniform_random: {
      const auto k = static_cast<std::uint64_t>(std::llround(tau / spec.Ts));
      for (std::size_t j = 0; j < n_u; ++j) {
        auto rng = make_engine(spec.seed, (j << 40) ^ k);
        std::uniform_real_distribution<double> d(-spec.amplitude, spec.amplitude);
        u_out[j] = d(rng);
      }
      return;
    }
    case Excitation::Kind::two_tone_windowed: {
      const auto k = static_cast<std::size_t>(std::llround(tau / spec.Ts));
      bool quiet = false;
      for (const auto& [lo, hi] : spec.quiet_windows)
        if (k > lo && k <= hi) {
          quiet = true;
          break;
        }
      for (std::size_t j = 0; j < n_u; ++j) {
        if (spec.recovery_threshold > 0.0 && std::fabs(z[j]) >= spec.recovery_threshold) {
          u_out[j] = spec.recovery_gain * z[j];
        } else if (quiet) {
          u_out[j] = 0.0;
        } else {
          const double w1 = spec.tones.at(2 * j);
          const double w2 = spec.tones.at(2 * j + 1);
          u_out[j] = spec.amplitude * (std::sin(w1 * tau) + std::sin(w2 * tau));
        }
      }
      return;
    }
  }
}

LpvDataset acquire_dataset(const PlantModel& model, const Excitation& excitation,
                           double Ts, std::size_t L,
                           const std::vector<double>& x0,
                           const NoiseSpec& state_noise, const NoiseSpec& input_noise,
                           const SchedulingMap& scheduling, std::size_t substeps) {
  if (L < 2) throw ConfigError("acquire_dataset: L must be at least 2");
  if (!(Ts > 0.0)) throw ConfigError("acquire_dataset: Ts must be positive");
  if (substeps == 0) throw ConfigError("acquire_dataset: substeps must be positive");
  if (x0.size() != model.state_dim) throw ConfigError("acquire_dataset: x0 dimension mismatch");
  if (scheduling.kind == SchedulingMap::Kind::external)
    throw ConfigError("acquire_dataset: external scheduling needs a synthetic fixture path");

  const std::size_t n_x = model.state_dim;
  const std::size_t n_u = model.input_dim;
  Matrix x_true(L + 1, n_x);
  Matrix u_applied(L, n_u);

  std::vector<double> x = x0;
  std::vector<double> u(n_u, 0.0);
  const double dt = Ts / static_cast<double>(substeps);
  for (std::size_t j = 0; j < n_x; ++j) x_true(0, j) = x[j];
  for (std::size_t k = 0; k < L; ++k) {
    const double tau = static_cast<double>(k) * Ts;
    excitation_signal(excitation, tau, x.data(), n_u, u.data());
    for (std::size_t j = 0; j < n_u; ++j) u_applied(k, j) = u[j];
    // Hold the input across every inner step of this sampling interval.
    for (std::size_t s = 0; s < substeps; ++s)
      rk4_step(model, x.data(), u.data(), tau + static_cast<double>(s) * dt, dt);
    check_finite(x.data(), n_x, k + 1);
    for (std::size_t j = 0; j < n_x; ++j) x_true(k + 1, j) = x[j];
  }

  LpvDataset data;
  data.L = L;
  data.Ts = Ts;
  data.scheduling = scheduling;
  data.x = x_true;
  const Matrix xi_x = draw_noise(state_noise, x_true, 0);
  for (std::size_t i = 0; i < data.x.data.size(); ++i) data.x.data[i] += xi_x.data[i];
  data.u = u_applied;
  const Matrix xi_u = draw_noise(input_noise, u_applied, 100);
  for (std::size_t i = 0; i < data.u.data.size(); ++i) data.u.data[i] += xi_u.data[i];

  data.p = Matrix(L, scheduling.dim(n_x));
  for (std::size_t k = 0; k < L; ++k)
    scheduling.apply(data.x.row(k), n_x, data.p.row(k));

  data.meta["plant"] = model.name;
  data.meta["state-noise"] = state_noise.str();
  data.meta["state-noise-level"] = std::to_string(state_noise.level);
  data.meta["state-noise-seed"] = std::to_string(state_noise.seed);
  data.meta["input-noise"] = input_noise.str();
  data.meta["input-noise-level"] = std::to_string(input_noise.level);
  data.meta["input-noise-seed"] = std::to_string(input_noise.seed);
  data.validate();
  return data;
}

}  // namespace dfk

#include "dfk/closedloop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "dfk/errors.hpp"
#include "dfk/rng.hpp"
#include "dfk/simd.hpp"

namespace dfk {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError(what);
  }
}

// Critically damped second-order unity-DC low-pass, bilinear discretization:
// two real poles at the cutoff.  Filters in place.
void second_order_lowpass(std::vector<double>& w, double cutoff, double Ts) {
  const double a = 2.0 / Ts;
  const double pole = (a - cutoff) / (a + cutoff);
  const double gain = (cutoff / (a + cutoff)) * (cutoff / (a + cutoff));
  double w1 = 0.0, w2 = 0.0;  // raw history
  double y1 = 0.0, y2 = 0.0;  // output history
  for (double& wk : w) {
    const double yk = gain * (wk + 2.0 * w1 + w2) + 2.0 * pole * y1 - pole * pole * y2;
    w2 = w1;
    w1 = wk;
    y2 = y1;
    y1 = yk;
    wk = yk;
  }
}

struct LoopDims {
  std::size_t T = 0;
  std::size_t n_x = 0;
  std::size_t n_u = 0;
  std::size_t n_p = 0;
  bool delayed = false;  // controllers run on the (y_t, y_{t-1}) pair
};

LoopDims check_loop_setup(std::size_t plant_states, std::size_t plant_inputs,
                          const std::vector<Controller>& controllers,
                          const Matrix& reference, double Ts,
                          const SchedulingMap& scheduling) {
  LoopDims dims;
  require(reference.rows >= 2, "reference needs at least two rows");
  require(Ts > 0.0, "sample period must be positive");
  dims.T = reference.rows - 1;
  dims.n_x = plant_states;
  require(reference.cols == dims.n_x,
          "reference channel count must match the state dimension");
  dims.n_u = plant_inputs;
  require(controllers.size() == dims.n_u,
          "need exactly one controller per input channel");
  require(scheduling.kind != SchedulingMap::Kind::external,
          "closed-loop simulation needs a state-derived scheduling map");
  dims.delayed = scheduling.kind == SchedulingMap::Kind::output_delay;
  const std::size_t ctrl_states = dims.delayed ? 2 : dims.n_x;
  dims.n_p = scheduling.dim(ctrl_states);
  for (const auto& k : controllers) {
    k.validate();
    require(k.n_x == ctrl_states,
            "controller state dimension does not fit this loop");
    require(k.basis.n_p == dims.n_p,
            "controller scheduling dimension does not fit this map");
  }
  return dims;
}

// Everything below the plant step is shared between the continuous and the
// synthetic discrete loop.
struct LoopState {
  LoopDims dims;
  SchedulingMap sched;
  ClosedLoopRun run;
  Matrix noise;             // T x n_x measurement noise
  std::vector<double> x;    // current true state
  std::vector<double> meas; // measured state
  std::vector<double> p;    // scheduling vector
  std::vector<double> u;    // input this step
  std::vector<double> ctrl_state;  // what the controllers see
  std::vector<double> ctrl_ref;    // their next-reference vector
  double y_prev = 0.0;             // delayed-output history, starts at rest
};

LoopState start_loop(const LoopDims& dims, const SchedulingMap& scheduling,
                     const Matrix& reference, const NoiseSpec& noise, double Ts) {
  LoopState s;
  s.dims = dims;
  s.sched = scheduling;
  s.run.Ts = Ts;
  s.run.r = reference;
  s.run.x = Matrix(dims.T + 1, dims.n_x);
  s.run.x_meas = Matrix(dims.T, dims.n_x);
  s.run.p = Matrix(dims.T, dims.n_p);
  s.run.u = Matrix(dims.T, dims.n_u);
  s.run.te.assign(dims.T + 1, 0.0);

  // Measurement-noise table drawn up front from the reference's per-channel
  // spread, so the draws do not depend on the trajectory they perturb.
  Matrix head(dims.T, dims.n_x);
  for (std::size_t t = 0; t < dims.T; ++t) {
    const double* src = reference.row(t);
    std::copy(src, src + dims.n_x, head.row(t));
  }
  s.noise = draw_noise(noise, head, 500);

  s.x.assign(dims.n_x, 0.0);
  s.meas.resize(dims.n_x);
  s.p.resize(dims.n_p);
  s.u.resize(dims.n_u);
  s.ctrl_state.resize(s.dims.delayed ? 2 : dims.n_x);
  s.ctrl_ref.resize(s.dims.delayed ? 2 : dims.n_x);
  return s;
}

// Measures, schedules, evaluates the controllers; records row t.
void control_step(LoopState& s, const std::vector<Controller>& controllers,
                  std::size_t t) {
  const auto& dims = s.dims;
  for (std::size_t j = 0; j < dims.n_x; ++j) {
    s.meas[j] = s.x[j] + s.noise(t, j);
  }
  if (dims.delayed) {
    s.ctrl_state[0] = s.meas[0];
    s.ctrl_state[1] = s.y_prev;
    s.p[0] = s.ctrl_state[0];
    s.p[1] = s.ctrl_state[1];
    s.ctrl_ref[0] = s.run.r(t + 1, 0);
    s.ctrl_ref[1] = s.run.r(t, 0);
  } else {
    std::copy(s.meas.begin(), s.meas.end(), s.ctrl_state.begin());
    s.sched.apply(s.meas.data(), dims.n_x, s.p.data());
    const double* next_ref = s.run.r.row(t + 1);
    std::copy(next_ref, next_ref + dims.n_x, s.ctrl_ref.begin());
  }
  for (std::size_t j = 0; j < dims.n_u; ++j) {
    s.u[j] = controllers[j].evaluate(s.p.data(), s.ctrl_ref.data(),
                                     s.ctrl_state.data());
  }
  std::copy(s.meas.begin(), s.meas.end(), s.run.x_meas.row(t));
  std::copy(s.p.begin(), s.p.end(), s.run.p.row(t));
  std::copy(s.u.begin(), s.u.end(), s.run.u.row(t));
  std::copy(s.x.begin(), s.x.end(), s.run.x.row(t));
  if (dims.delayed) {
    s.y_prev = s.meas[0];
  }
}

void check_state(const LoopState& s, double blowup, std::size_t step) {
  for (double v : s.x) {
    if (!std::isfinite(v) || std::abs(v) > blowup) {
      throw DivergenceError("closed-loop state diverged", step);
    }
  }
}

ClosedLoopRun finish_loop(LoopState& s) {
  const auto& dims = s.dims;
  std::copy(s.x.begin(), s.x.end(), s.run.x.row(dims.T));
  for (std::size_t t = 0; t <= dims.T; ++t) {
    s.run.te[t] =
        simd::max_abs_diff(s.run.r.row(t), s.run.x.row(t), dims.n_x);
  }
  s.run.rms_error.assign(dims.n_x, 0.0);
  for (std::size_t c = 0; c < dims.n_x; ++c) {
    double acc = 0.0;
    for (std::size_t t = 1; t <= dims.T; ++t) {
      const double d = s.run.r(t, c) - s.run.x(t, c);
      acc += d * d;
    }
    s.run.rms_error[c] = std::sqrt(acc / static_cast<double>(dims.T));
  }
  return std::move(s.run);
}

}  // namespace

Matrix generate_reference(const ReferenceSpec& spec, std::size_t count,
                          std::size_t n_x) {
  require(count >= 1, "reference needs at least one sample");
  require(n_x >= 1, "reference needs at least one channel");
  require(spec.amplitude >= 0.0, "reference amplitude cannot be negative");
  require(spec.cutoff > 0.0, "reference cutoff must be positive");
  require(spec.Ts > 0.0, "reference sample period must be positive");
  std::size_t base = n_x;
  if (spec.derivative_channel) {
    require(n_x % 2 == 0,
            "derivative channels need an even total channel count");
    base = n_x / 2;
  }
  Matrix out(count, n_x);
  for (std::size_t c = 0; c < base; ++c) {
    auto rng = make_engine(spec.seed, 2000 + c);
    std::uniform_real_distribution<double> level(-spec.amplitude, spec.amplitude);
    std::vector<double> w(count, 0.0);
    if (spec.kind == ReferenceSpec::Kind::filtered_uniform) {
      for (auto& wk : w) {
        wk = level(rng);
      }
    } else {
      require(spec.dwell > 0.0, "step dwell must be positive");
      const std::size_t hold = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(spec.dwell / spec.Ts)));
      double current = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        if (k % hold == 0) {
          current = level(rng);
        }
        w[k] = current;
      }
    }
    second_order_lowpass(w, spec.cutoff, spec.Ts);
    for (std::size_t k = 0; k < count; ++k) {
      out(k, c) = w[k];
    }
    if (spec.derivative_channel) {
      double prev = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        out(k, base + c) = (w[k] - prev) / spec.Ts;
        prev = w[k];
      }
    }
  }
  return out;
}

void KnownLpvSystem::validate() const {
  require(n_x >= 1, "synthetic system needs at least one state");
  require(n_e >= 1, "synthetic system needs a declared noise dimension");
  require(static_cast<bool>(A) && static_cast<bool>(B) && static_cast<bool>(H),
          "synthetic system needs all three matrix maps");
  require(p_lo.size() == n_p && p_hi.size() == n_p,
          "scheduling box does not match the declared dimension");
  require(x_lo.size() == n_x && x_hi.size() == n_x,
          "state box does not match the declared dimension");
  require(e_lo.size() == n_e && e_hi.size() == n_e,
          "noise box does not match the declared dimension");
  for (std::size_t j = 0; j < n_p; ++j) {
    require(p_lo[j] <= p_hi[j], "scheduling box is inverted");
  }
  for (std::size_t j = 0; j < n_x; ++j) {
    require(x_lo[j] <= x_hi[j], "state box is inverted");
  }
  for (std::size_t j = 0; j < n_e; ++j) {
    require(e_lo[j] <= e_hi[j], "noise box is inverted");
  }
}

ClosedLoopRun simulate_closed_loop(const PlantModel& plant,
                                   const std::vector<Controller>& controllers,
                                   const Matrix& reference, const NoiseSpec& noise,
                                   double Ts, const SchedulingMap& scheduling,
                                   const SimulateOptions& opt) {
  require(static_cast<bool>(plant.dynamics), "plant has no dynamics");
  require(opt.substeps >= 1, "need at least one integrator substep");
  const LoopDims dims = check_loop_setup(plant.state_dim, plant.input_dim,
                                         controllers, reference, Ts, scheduling);
  LoopState s = start_loop(dims, scheduling, reference, noise, Ts);
  const double dt = Ts / static_cast<double>(opt.substeps);
  for (std::size_t t = 0; t < dims.T; ++t) {
    control_step(s, controllers, t);
    double tau = static_cast<double>(t) * Ts;
    for (std::size_t sub = 0; sub < opt.substeps; ++sub) {
      rk4_step(plant, s.x.data(), s.u.data(), tau, dt);
      tau += dt;
    }
    check_state(s, opt.blowup, t + 1);
  }
  return finish_loop(s);
}

ClosedLoopRun simulate_closed_loop(const KnownLpvSystem& sys,
                                   const std::vector<Controller>& controllers,
                                   const Matrix& reference, const NoiseSpec& noise,
                                   double Ts, const SchedulingMap& scheduling,
                                   const SimulateOptions& opt) {
  sys.validate();
  const LoopDims dims =
      check_loop_setup(sys.n_x, 1, controllers, reference, Ts, scheduling);
  require(!dims.delayed || sys.n_x == 2,
          "delayed-output loops need a two-dimensional synthetic system");
  LoopState s = start_loop(dims, scheduling, reference, noise, Ts);
  std::vector<double> next(dims.n_x);
  for (std::size_t t = 0; t < dims.T; ++t) {
    control_step(s, controllers, t);
    const Matrix a = sys.A(s.p.data());
    const std::vector<double> b = sys.B(s.p.data());
    require(a.rows == dims.n_x && a.cols == dims.n_x,
            "system map A returned the wrong shape");
    require(b.size() == dims.n_x, "system map B returned the wrong shape");
    for (std::size_t i = 0; i < dims.n_x; ++i) {
      next[i] = simd::dot(a.row(i), s.x.data(), dims.n_x) + b[i] * s.u[0];
    }
    s.x = next;
    check_state(s, opt.blowup, t + 1);
  }
  return finish_loop(s);
}

double rms(const std::vector<double>& z) {
  if (z.empty()) {
    throw ConfigError("rms of an empty sequence");
  }
  const double acc = simd::dot(z.data(), z.data(), z.size());
  return std::sqrt(acc / static_cast<double>(z.size()));
}

double inversion_error(const KnownLpvSystem& sys, const Controller& k,
                       const double* p, const double* r, const double* x,
                       const double* e) {
  const Matrix a = sys.A(p);
  const std::vector<double> b = sys.B(p);
  const Matrix h = sys.H(p);
  std::vector<double> k1(sys.n_x), k2(sys.n_x);
  k.gains(p, k1.data(), k2.data());
  const double k1r = simd::dot(k1.data(), r, sys.n_x);
  double worst = 0.0;
  for (std::size_t l = 0; l < sys.n_x; ++l) {
    double acc = r[l];
    for (std::size_t j = 0; j < sys.n_x; ++j) {
      acc -= (a(l, j) - b[l] * k2[j]) * x[j];
    }
    acc -= b[l] * k1r;
    for (std::size_t j = 0; j < sys.n_e; ++j) {
      acc -= h(l, j) * e[j];
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

namespace {

// Uniform grid walker over stacked boxes: density points per dimension
// (midpoint when density is 1 or the box is flat).
struct GridWalker {
  std::vector<double> lo, hi;
  std::size_t density;
  std::vector<std::size_t> idx;
  std::vector<double> point;
  bool done = false;

  GridWalker(std::vector<double> l, std::vector<double> h, std::size_t d)
      : lo(std::move(l)), hi(std::move(h)), density(d), idx(lo.size(), 0),
        point(lo.size(), 0.0) {
    refresh();
  }
  void refresh() {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (density <= 1 || hi[j] <= lo[j]) {
        point[j] = 0.5 * (lo[j] + hi[j]);
      } else {
        point[j] = lo[j] + (hi[j] - lo[j]) * static_cast<double>(idx[j]) /
                               static_cast<double>(density - 1);
      }
    }
  }
  void advance() {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (++idx[j] < density) {
        refresh();
        return;
      }
      idx[j] = 0;
    }
    done = true;
    refresh();
  }
};

}  // namespace

double global_inversion_error(const KnownLpvSystem& sys, const Controller& k,
                              std::size_t density) {
  sys.validate();
  require(density >= 1, "grid density must be at least one");
  std::vector<double> lo, hi;
  auto append = [&](const std::vector<double>& a, const std::vector<double>& b) {
    lo.insert(lo.end(), a.begin(), a.end());
    hi.insert(hi.end(), b.begin(), b.end());
  };
  append(sys.p_lo, sys.p_hi);  // p block
  append(sys.x_lo, sys.x_hi);  // r ranges over the state box
  append(sys.x_lo, sys.x_hi);  // x block
  append(sys.e_lo, sys.e_hi);  // e block
  GridWalker walk(std::move(lo), std::move(hi), density);
  double worst = 0.0;
  while (!walk.done) {
    const double* p = walk.point.data();
    const double* r = p + sys.n_p;
    const double* x = r + sys.n_x;
    const double* e = x + sys.n_x;
    worst = std::max(worst, inversion_error(sys, k, p, r, x, e));
    walk.advance();
  }
  return worst;
}

double lambda2_grid(const Controller& ka, const Controller& kb,
                    const std::vector<double>& p_lo,
                    const std::vector<double>& p_hi, std::size_t density) {
  ka.validate();
  kb.validate();
  require(ka.n_x == kb.n_x, "controllers must share the state dimension");
  require(ka.basis.n_p == kb.basis.n_p,
          "controllers must share the scheduling dimension");
  require(p_lo.size() == ka.basis.n_p && p_hi.size() == ka.basis.n_p,
          "scheduling box does not match the controllers");
  require(density >= 1, "grid density must be at least one");
  std::vector<double> k1a(ka.n_x), k2a(ka.n_x), k1b(ka.n_x), k2b(ka.n_x);
  GridWalker walk(p_lo, p_hi, density);
  double worst = 0.0;
  while (!walk.done) {
    ka.gains(walk.point.data(), k1a.data(), k2a.data());
    kb.gains(walk.point.data(), k1b.data(), k2b.data());
    double gap = 0.0;
    for (std::size_t l = 0; l < ka.n_x; ++l) {
      gap += std::abs(k2a[l] - k2b[l]);
    }
    worst = std::max(worst, gap);
    walk.advance();
  }
  return worst;
}

TrackingBoundReport verify_tracking_bound(const KnownLpvSystem& sys,
                                          const Controller& k_oracle,
                                          const Controller& k_hat,
                                          const ClosedLoopRun& run,
                                          double lambda_B) {
  sys.validate();
  k_oracle.validate();
  k_hat.validate();
  require(sys.n_e == sys.n_x,
          "bound verification expects measurement-shaped noise (n_e = n_x)");
  require(run.steps() >= 1, "run has no steps");
  require(run.u.cols == 1, "bound verification handles single-input runs");
  const std::size_t T = run.steps();
  const std::size_t n_x = sys.n_x;
  TrackingBoundReport rep;
  rep.margin.resize(T);
  std::vector<double> e_prev(n_x);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= T; ++t) {
    const double* p_prev = run.p.row(t - 1);
    const double* x_prev = run.x.row(t - 1);
    const double* meas_prev = run.x_meas.row(t - 1);
    const double* r_t = run.r.row(t);
    for (std::size_t j = 0; j < n_x; ++j) {
      e_prev[j] = meas_prev[j] - x_prev[j];
    }
    const double u_oracle = k_oracle.evaluate(p_prev, r_t, meas_prev);
    const double du = run.u(t - 1, 0) - u_oracle;
    const double ie =
        inversion_error(sys, k_oracle, p_prev, r_t, x_prev, e_prev.data());
    const double margin = ie + lambda_B * std::abs(du) - run.te[t];
    rep.margin[t - 1] = margin;
    if (margin < best) {
      best = margin;
      rep.argmin = t;
    }
  }
  rep.min_margin = best;
  return rep;
}

MonteCarloSummary monte_carlo(
    std::size_t n_trials,
    const std::function<TrialResult(std::size_t)>& trial_fn) {
  require(n_trials >= 1, "need at least one trial");
  require(static_cast<bool>(trial_fn), "trial function is empty");
  MonteCarloSummary sum;
  sum.trials = n_trials;
  sum.per_trial.reserve(n_trials);
  std::size_t used = 0;
  double selected_acc = 0.0;
  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialResult r = trial_fn(i);
    if (r.diverged) {
      sum.failures += 1;
    } else {
      if (sum.mean_rms.empty()) {
        sum.mean_rms.assign(r.rms_error.size(), 0.0);
      }
      require(r.rms_error.size() == sum.mean_rms.size(),
              "trials disagree on the metric channel count");
      for (std::size_t c = 0; c < r.rms_error.size(); ++c) {
        sum.mean_rms[c] += r.rms_error[c];
      }
      selected_acc += static_cast<double>(r.selected);
      used += 1;
    }
    sum.per_trial.push_back(std::move(r));
  }
  if (used > 0) {
    for (auto& v : sum.mean_rms) {
      v /= static_cast<double>(used);
    }
    sum.mean_selected = selected_acc / static_cast<double>(used);
  }
  return sum;
}

std::string MonteCarloSummary::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "trials = " << trials << '\n' << "failures = " << failures << '\n';
  for (std::size_t c = 0; c < mean_rms.size(); ++c) {
    os << "mean_rms_" << (c + 1) << " = " << mean_rms[c] << '\n';
  }
  os << "mean_selected = " << mean_selected << '\n';
  return os.str();
}

void write_run_csv(const ClosedLoopRun& run, const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw IoError("cannot open run file for writing: " + path);
  }
  os.precision(17);
  const std::size_t T = run.steps();
  const std::size_t n_x = run.x.cols;
  const std::size_t n_u = run.u.cols;
  os << "t";
  for (std::size_t c = 0; c < n_x; ++c) os << ",r_" << (c + 1);
  for (std::size_t c = 0; c < n_x; ++c) os << ",x_" << (c + 1);
  for (std::size_t c = 0; c < n_u; ++c) os << ",u_" << (c + 1);
  os << ",TE\n";
  for (std::size_t t = 0; t <= T; ++t) {
    os << static_cast<double>(t) * run.Ts;
    for (std::size_t c = 0; c < n_x; ++c) os << ',' << run.r(t, c);
    for (std::size_t c = 0; c < n_x; ++c) os << ',' << run.x(t, c);
    for (std::size_t c = 0; c < n_u; ++c) {
      if (t < T) {
        os << ',' << run.u(t, c);
      } else {
        os << ',';
      }
    }
    os << ',' << run.te[t] << '\n';
  }
  if (!os) {
    throw IoError("failed while writing run file: " + path);
  }
}

}  // namespace dfk

#include "dfk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dfk/errors.hpp"
#include "dfk/rng.hpp"

namespace dfk {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

Excitation::Kind parse_excitation_kind(const std::string& text) {
  if (text == "zero") return Excitation::Kind::zero;
  if (text == "sine") return Excitation::Kind::sine;
  if (text == "sine_plus_noise") return Excitation::Kind::sine_plus_noise;
  if (text == "uniform_random") return Excitation::Kind::uniform_random;
  if (text == "two_tone_windowed") return Excitation::Kind::two_tone_windowed;
  throw ConfigError("unknown excitation kind '" + text + "'");
}

ReferenceSpec::Kind parse_reference_kind(const std::string& text) {
  if (text == "filtered_uniform") return ReferenceSpec::Kind::filtered_uniform;
  if (text == "filtered_steps") return ReferenceSpec::Kind::filtered_steps;
  throw ConfigError("unknown reference kind '" + text + "'");
}

NoiseSpec parse_noise(ConfigMap& map, const std::string& prefix) {
  const std::string kind = map.get_string(prefix + ".kind", "none");
  const double level = map.get_double(prefix + ".level", 0.0);
  const std::uint64_t seed = map.get_seed(prefix + ".seed", 0);
  return NoiseSpec::parse(kind, level, seed);
}

std::vector<std::pair<std::size_t, std::size_t>> parse_windows(
    const std::string& key, const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config key '" + key +
                        "': windows must read 'lo:hi,lo:hi'");
    }
    try {
      const unsigned long long lo = std::stoull(item.substr(0, colon));
      const unsigned long long hi = std::stoull(item.substr(colon + 1));
      if (hi <= lo) {
        throw ConfigError("config key '" + key + "': window '" + item +
                          "' is empty");
      }
      out.emplace_back(static_cast<std::size_t>(lo),
                       static_cast<std::size_t>(hi));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad window '" + item + "'");
    }
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty window list");
  }
  return out;
}

std::string basename_of(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace

PlantModel PipelineConfig::plant() const {
  if (plant_kind == "duffing") {
    return duffing_plant(duffing_alpha1, duffing_alpha2, duffing_beta);
  }
  if (plant_kind == "two_link") {
    return two_link_plant(arm_l1, arm_l2, arm_m1, arm_m2, arm_g);
  }
  if (plant_kind == "linear") {
    return scalar_linear_plant(linear_a, linear_b);
  }
  throw ConfigError("unknown plant kind '" + plant_kind + "'");
}

void PipelineConfig::validate() const {
  require(plant_kind == "duffing" || plant_kind == "two_link" ||
              plant_kind == "linear",
          "plant.kind must be 'duffing', 'two_link', or 'linear'");
  require(substeps >= 1, "acquire.substeps must be at least 1");
  require(sim.substeps >= 1, "simulate.substeps must be at least 1");
  require(std::isfinite(delta_scale) && delta_scale > 0.0,
          "estimate.delta_scale must be positive");
  require(std::isfinite(floor_margin) &&
              (floor_margin == 0.0 || floor_margin >= 1.0),
          "estimate.floor_margin must be 0 (disabled) or at least 1");
  require(scheduling.kind != SchedulingMap::Kind::external,
          "externally scheduled experiments are not supported; the map must "
          "derive from the measured state");
  if (!x0.empty()) {
    const PlantModel model = plant();
    require(x0.size() == model.state_dim,
            "acquire.x0 length does not match the plant state dimension");
  }
}

PipelineConfig parse_pipeline_config(ConfigMap& map) {
  PipelineConfig cfg;

  cfg.plant_kind = map.get_string("plant.kind", "duffing");
  cfg.duffing_alpha1 = map.get_double("plant.alpha1", cfg.duffing_alpha1);
  cfg.duffing_alpha2 = map.get_double("plant.alpha2", cfg.duffing_alpha2);
  cfg.duffing_beta = map.get_double("plant.beta", cfg.duffing_beta);
  cfg.arm_l1 = map.get_double("plant.l1", cfg.arm_l1);
  cfg.arm_l2 = map.get_double("plant.l2", cfg.arm_l2);
  cfg.arm_m1 = map.get_double("plant.m1", cfg.arm_m1);
  cfg.arm_m2 = map.get_double("plant.m2", cfg.arm_m2);
  cfg.arm_g = map.get_double("plant.g", cfg.arm_g);
  cfg.linear_a = map.get_double("plant.a", cfg.linear_a);
  cfg.linear_b = map.get_double("plant.b", cfg.linear_b);

  cfg.excitation.kind =
      parse_excitation_kind(map.get_string("excitation.kind", "zero"));
  cfg.excitation.amplitude = map.get_double("excitation.amplitude", 0.0);
  cfg.excitation.omega = map.get_double("excitation.omega", 1.0);
  cfg.excitation.noise_std = map.get_double("excitation.noise_std", 0.0);
  cfg.excitation.seed = map.get_seed("excitation.seed", 0);
  cfg.excitation.tones = map.get_doubles("excitation.tones", {});
  cfg.excitation.recovery_threshold =
      map.get_double("excitation.recovery_threshold", 0.0);
  cfg.excitation.recovery_gain =
      map.get_double("excitation.recovery_gain", 0.0);
  if (map.has("excitation.quiet_windows")) {
    cfg.excitation.quiet_windows = parse_windows(
        "excitation.quiet_windows", map.get_string("excitation.quiet_windows"));
  }

  cfg.L = map.get_size("acquire.L", 0);
  cfg.Ts = map.get_double("acquire.Ts", 0.0);
  cfg.substeps = map.get_size("acquire.substeps", 10);
  cfg.x0 = map.get_doubles("acquire.x0", {});
  cfg.state_noise = parse_noise(map, "acquire.state_noise");
  cfg.input_noise = parse_noise(map, "acquire.input_noise");
  cfg.scheduling =
      SchedulingMap::parse(map.get_string("acquire.scheduling", "identity"));
  cfg.output_index = map.get_size("acquire.output_index", 0);

  const std::string family = map.get_string("basis.family", "polynomial");
  require(family == "polynomial",
          "basis.family: only the polynomial family is configurable");
  cfg.degree = map.get_size("basis.degree", 6);

  cfg.estimate.inflation = map.get_double("estimate.inflation", 1.25);
  cfg.estimate.grid_size = map.get_size("estimate.grid_size", 40);
  cfg.estimate.window = map.get_size("estimate.window", 50);
  cfg.estimate.lambda_b_radius =
      map.get_double("estimate.lambda_b_radius", 0.0);
  cfg.delta_override = map.get_double("estimate.delta", -1.0);
  cfg.delta_scale = map.get_double("estimate.delta_scale", 1.0);
  cfg.floor_margin = map.get_double("estimate.floor_margin", 1.02);
  cfg.lambda_s_override = map.get_double("estimate.lambda_s", -1.0);

  cfg.design.safety_margin = map.get_double("design.safety_margin", 0.8);
  cfg.design.lambda2_s_override = map.get_double("design.lambda2_s", 0.0);
  cfg.design.sparsity_threshold =
      map.get_double("design.sparsity_threshold", 1e-6);
  cfg.design.lp.tolerance = map.get_double("design.lp_tolerance", 1e-8);
  cfg.design.lp.max_iters = map.get_size("design.lp_max_iters", 100);

  cfg.sim_steps = map.get_size("simulate.steps", 0);
  cfg.sim_Ts = map.get_double("simulate.Ts", 0.0);
  cfg.sim.substeps = map.get_size("simulate.substeps", 10);
  cfg.sim.blowup = map.get_double("simulate.blowup", 1e9);
  cfg.reference.kind = parse_reference_kind(
      map.get_string("simulate.reference.kind", "filtered_uniform"));
  cfg.reference.amplitude =
      map.get_double("simulate.reference.amplitude", 1.0);
  cfg.reference.cutoff = map.get_double("simulate.reference.cutoff", 1.0);
  cfg.reference.dwell = map.get_double("simulate.reference.dwell", 10.0);
  cfg.reference.seed = map.get_seed("simulate.reference.seed", 0);
  cfg.reference.derivative_channel =
      map.get_bool("simulate.reference.derivative_channel", false);
  cfg.sim_noise = parse_noise(map, "simulate.noise");

  cfg.trials = map.get_size("montecarlo.trials", 0);
  cfg.batch_seed = map.get_seed("montecarlo.seed", 0);

  map.finish();
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  ConfigMap map = ConfigMap::from_file(path);
  return parse_pipeline_config(map);
}

std::uint64_t trial_seed(std::uint64_t batch_seed, std::size_t index) {
  return mix_seed(batch_seed, 0xD0000u + static_cast<std::uint64_t>(index));
}

void override_seeds(PipelineConfig& cfg, std::uint64_t seed) {
  cfg.excitation.seed = mix_seed(seed, 11);
  cfg.state_noise.seed = mix_seed(seed, 12);
  cfg.input_noise.seed = mix_seed(seed, 13);
  cfg.reference.seed = mix_seed(seed, 14);
  cfg.sim_noise.seed = mix_seed(seed, 15);
  cfg.batch_seed = seed;
}

LpvDataset run_acquire(const PipelineConfig& cfg) {
  cfg.validate();
  require(cfg.L >= 2, "acquire.L must be at least 2");
  require(std::isfinite(cfg.Ts) && cfg.Ts > 0.0,
          "acquire.Ts must be positive");

  const PlantModel model = cfg.plant();
  Excitation exc = cfg.excitation;
  exc.Ts = cfg.Ts;
  std::vector<double> x0 = cfg.x0;
  if (x0.empty()) x0.assign(model.state_dim, 0.0);

  const bool delayed = cfg.scheduling.kind == SchedulingMap::Kind::output_delay;
  SchedulingMap acquire_map = cfg.scheduling;
  if (delayed) acquire_map.kind = SchedulingMap::Kind::identity;

  LpvDataset data =
      acquire_dataset(model, exc, cfg.Ts, delayed ? cfg.L + 1 : cfg.L, x0,
                      cfg.state_noise, cfg.input_noise, acquire_map,
                      cfg.substeps);
  if (delayed) {
    require(cfg.output_index < model.state_dim,
            "acquire.output_index is outside the plant state");
    data = to_output_delay(data, cfg.output_index);
  }
  data.meta["scheduling"] = cfg.scheduling.str();
  return data;
}

DesignArtifacts run_design(const LpvDataset& data, const PipelineConfig& cfg) {
  data.validate();
  const std::size_t n_u = data.n_u();
  require(n_u >= 1, "dataset carries no input channel");

  const BasisSet basis = polynomial_basis(data.n_p(), cfg.degree);

  DesignArtifacts arts;
  for (std::size_t j = 0; j < n_u; ++j) {
    LpvDataset channel = data;
    channel.u = Matrix(data.L, 1);
    for (std::size_t k = 0; k < data.L; ++k) {
      channel.u(k, 0) = data.u(k, j);
    }

    PriorBounds priors = estimate_priors(channel, cfg.estimate);
    if (cfg.delta_override >= 0.0) {
      priors.delta = cfg.delta_override;
      priors.provenance += "; delta overridden";
    } else if (cfg.floor_margin > 0.0) {
      // The pairwise estimate tracks typical noise levels; the sup-norm fit
      // constraints need the worst sample.  Raise delta to just above the
      // minimax fit error whenever the estimate falls below it, otherwise the
      // design program has no feasible coefficient vector at all.
      const double floor = chebyshev_fit_floor(channel, basis, cfg.design.lp);
      if (priors.delta < cfg.floor_margin * floor) {
        char note[96];
        std::snprintf(note, sizeof(note),
                      "; delta raised to feasibility floor (%.6g x %.6g)",
                      cfg.floor_margin, floor);
        priors.delta = cfg.floor_margin * floor;
        priors.provenance += note;
      }
    }
    if (cfg.delta_scale != 1.0) {
      priors.delta *= cfg.delta_scale;
      priors.provenance += "; delta scaled by " + std::to_string(cfg.delta_scale);
    }
    if (cfg.lambda_s_override > 0.0) {
      priors.lambda_S = cfg.lambda_s_override;
      priors.provenance += "; lambda_S overridden";
    }

    auto [controller, report] = design_controller(channel, basis, priors,
                                                  cfg.design);
    arts.priors.push_back(std::move(priors));
    arts.controllers.push_back(std::move(controller));
    arts.reports.push_back(std::move(report));
  }
  return arts;
}

ClosedLoopRun run_simulation(const std::vector<Controller>& controllers,
                             const PipelineConfig& cfg) {
  cfg.validate();
  require(cfg.sim_steps >= 1, "simulate.steps must be at least 1");
  const double ts = cfg.sim_Ts > 0.0 ? cfg.sim_Ts : cfg.Ts;
  require(std::isfinite(ts) && ts > 0.0,
          "simulate.Ts (or acquire.Ts) must be positive");

  const PlantModel model = cfg.plant();
  ReferenceSpec rspec = cfg.reference;
  rspec.Ts = ts;
  Matrix ref = generate_reference(rspec, cfg.sim_steps + 1, model.state_dim);

  if (cfg.scheduling.kind == SchedulingMap::Kind::output_delay &&
      model.state_dim >= 2) {
    // Delayed-output tracking: the second reference channel is the first
    // one delayed by a sample, matching the controller's regressor pair.
    for (std::size_t t = ref.rows; t-- > 0;) {
      ref(t, 1) = t == 0 ? 0.0 : ref(t - 1, 0);
    }
  }

  return simulate_closed_loop(model, controllers, ref, cfg.sim_noise, ts,
                              cfg.scheduling, cfg.sim);
}

MonteCarloSummary run_monte_carlo(const PipelineConfig& cfg) {
  return run_monte_carlo(cfg, cfg.trials);
}

MonteCarloSummary run_monte_carlo(const PipelineConfig& cfg,
                                  std::size_t n_trials) {
  require(n_trials >= 1, "montecarlo.trials must be at least 1");
  auto trial = [&cfg](std::size_t index) {
    PipelineConfig t = cfg;
    override_seeds(t, trial_seed(cfg.batch_seed, index));
    TrialResult result;
    try {
      const LpvDataset data = run_acquire(t);
      const DesignArtifacts arts = run_design(data, t);
      const ClosedLoopRun run = run_simulation(arts.controllers, t);
      result.rms_error = run.rms_error;
      for (const DesignReport& rep : arts.reports) {
        result.selected += rep.selected;
      }
    } catch (const DivergenceError& err) {
      result.diverged = true;
      result.divergence_step = err.step;
    } catch (const Error&) {
      result.diverged = true;
      result.divergence_step = 0;
    }
    return result;
  };
  return monte_carlo(n_trials, trial);
}

std::string channel_path(const std::string& out_path, std::size_t channel,
                         std::size_t n_channels) {
  if (n_channels <= 1) return out_path;
  const std::string base = basename_of(out_path);
  const std::size_t dot = base.find_last_of('.');
  const std::string suffix = "_ch" + std::to_string(channel + 1);
  if (dot == std::string::npos || dot == 0) return out_path + suffix;
  const std::size_t split = out_path.size() - (base.size() - dot);
  return out_path.substr(0, split) + suffix + out_path.substr(split);
}

void cmd_acquire(const std::string& config_path, const std::string& out_path,
                 std::int64_t seed) {
  ConfigMap map = ConfigMap::from_file(config_path);
  PipelineConfig cfg = parse_pipeline_config(map);
  if (seed >= 0) override_seeds(cfg, static_cast<std::uint64_t>(seed));

  LpvDataset data = run_acquire(cfg);
  for (const auto& [key, value] : map.entries()) {
    data.meta["config." + key] = value;
  }
  if (seed >= 0) data.meta["seed-override"] = std::to_string(seed);
  write_dataset_csv(data, out_path);
  std::cout << "wrote " << out_path << ": " << data.L << " rows, "
            << data.n_p() << " scheduling + " << data.n_x() << " state + "
            << data.n_u() << " input columns\n";
}

void cmd_design(const std::string& dataset_path, const std::string& config_path,
                const std::string& out_path) {
  const LpvDataset data = read_dataset_csv(dataset_path);
  ConfigMap map = ConfigMap::from_file(config_path);
  const PipelineConfig cfg = parse_pipeline_config(map);

  const DesignArtifacts arts = run_design(data, cfg);
  const std::size_t n = arts.controllers.size();

  std::ostringstream report;
  report << "dataset = " << dataset_path << '\n'
         << "config = " << config_path << '\n'
         << "channels = " << n << '\n';
  for (std::size_t j = 0; j < n; ++j) {
    const std::string path = channel_path(out_path, j, n);
    save_controller(arts.controllers[j], path);
    report << '\n'
           << "[channel " << (j + 1) << "]\n"
           << "controller = " << path << '\n'
           << "priors: " << arts.priors[j].provenance << '\n'
           << arts.reports[j].to_text();
    std::cout << "channel " << (j + 1) << ": wrote " << path << " ("
              << arts.reports[j].selected << " of "
              << arts.controllers[j].coeff_count()
              << " coefficients selected, status "
              << arts.reports[j].solver_status << ")\n";
  }
  report << "\n[config]\n";
  for (const auto& [key, value] : map.entries()) {
    report << key << " = " << value << '\n';
  }
  const std::string report_path = out_path + ".report";
  write_text_file(report_path, report.str());
  std::cout << "report: " << report_path << '\n';
}

void cmd_simulate(const std::vector<std::string>& controller_paths,
                  const std::string& config_path, const std::string& out_path,
                  std::int64_t seed) {
  PipelineConfig cfg = load_pipeline_config(config_path);
  if (seed >= 0) override_seeds(cfg, static_cast<std::uint64_t>(seed));

  std::vector<Controller> controllers;
  controllers.reserve(controller_paths.size());
  for (const std::string& path : controller_paths) {
    controllers.push_back(load_controller(path));
  }

  const ClosedLoopRun run = run_simulation(controllers, cfg);
  write_run_csv(run, out_path);

  std::ostringstream metrics;
  metrics.precision(17);
  metrics << "steps = " << run.steps() << '\n' << "Ts = " << run.Ts << '\n';
  double te_peak = 0.0;
  for (std::size_t t = 1; t < run.te.size(); ++t) {
    te_peak = std::max(te_peak, run.te[t]);
  }
  for (std::size_t c = 0; c < run.rms_error.size(); ++c) {
    metrics << "rms_" << (c + 1) << " = " << run.rms_error[c] << '\n';
  }
  metrics << "te_peak = " << te_peak << '\n';
  const std::string metrics_path = out_path + ".metrics";
  write_text_file(metrics_path, metrics.str());

  std::cout << "wrote " << out_path << " (" << run.steps() << " steps)\n";
  for (std::size_t c = 0; c < run.rms_error.size(); ++c) {
    std::cout << "rms_" << (c + 1) << " = " << run.rms_error[c] << '\n';
  }
  std::cout << "metrics: " << metrics_path << '\n';
}

void cmd_montecarlo(const std::string& config_path, const std::string& out_path,
                    std::int64_t seed, std::int64_t trials) {
  PipelineConfig cfg = load_pipeline_config(config_path);
  if (seed >= 0) override_seeds(cfg, static_cast<std::uint64_t>(seed));
  const std::size_t n =
      trials >= 0 ? static_cast<std::size_t>(trials) : cfg.trials;

  const MonteCarloSummary summary = run_monte_carlo(cfg, n);
  write_text_file(out_path, summary.to_text());

  std::ostringstream trial_csv;
  trial_csv.precision(17);
  std::size_t channels = 0;
  for (const TrialResult& r : summary.per_trial) {
    channels = std::max(channels, r.rms_error.size());
  }
  trial_csv << "trial,diverged,divergence_step,selected";
  for (std::size_t c = 0; c < channels; ++c) trial_csv << ",rms_" << (c + 1);
  trial_csv << '\n';
  for (std::size_t i = 0; i < summary.per_trial.size(); ++i) {
    const TrialResult& r = summary.per_trial[i];
    trial_csv << i << ',' << (r.diverged ? 1 : 0) << ','
              << r.divergence_step << ',' << r.selected;
    for (std::size_t c = 0; c < channels; ++c) {
      trial_csv << ',';
      if (c < r.rms_error.size()) trial_csv << r.rms_error[c];
    }
    trial_csv << '\n';
  }
  write_text_file(out_path + ".trials.csv", trial_csv.str());

  std::cout << summary.to_text();
  std::cout << "summary: " << out_path << '\n'
            << "trials: " << out_path << ".trials.csv\n";
}

std::string describe_artifact(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open artifact '" + path + "'");
  std::string first;
  std::getline(is, first);

  std::ostringstream out;
  if (first.rfind("k,p_1", 0) == 0) {
    const LpvDataset data = read_dataset_csv(path);
    out << "experiment dataset: " << data.L << " rows, " << data.n_p()
        << " scheduling, " << data.n_x() << " state, " << data.n_u()
        << " input columns, Ts = " << data.Ts << '\n';
    if (!data.meta.empty()) {
      out << data.meta.size() << " metadata entries";
      const auto plant = data.meta.find("plant");
      if (plant != data.meta.end()) out << " (plant: " << plant->second << ')';
      out << '\n';
    }
    return out.str();
  }
  if (first.rfind("t,r_1", 0) == 0) {
    std::size_t rows = 0;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty()) ++rows;
    }
    std::size_t channels = 0;
    for (std::size_t pos = first.find(",x_"); pos != std::string::npos;
         pos = first.find(",x_", pos + 1)) {
      ++channels;
    }
    out << "closed-loop run: " << (rows > 0 ? rows - 1 : 0) << " steps, "
        << channels << " state channels\n";
    return out.str();
  }
  if (first.rfind("gain-surface", 0) == 0) {
    const Controller k = load_controller(path);
    std::size_t nonzero = 0;
    for (double c : k.coeffs) {
      if (c != 0.0) ++nonzero;
    }
    out << "controller: " << k.n_x << " state channels, " << k.basis.m
        << " basis functions over " << k.basis.n_p
        << " scheduling dims, " << nonzero << " of " << k.coeff_count()
        << " coefficients nonzero\n";
    return out.str();
  }
  if (first.rfind("trials = ", 0) == 0 || first.rfind("dataset = ", 0) == 0 ||
      first.rfind("steps = ", 0) == 0) {
    out << first << '\n';
    std::string line;
    while (std::getline(is, line)) out << line << '\n';
    return out.str();
  }
  const std::string base = basename_of(path);
  if (base.size() >= 5 && base.compare(base.size() - 5, 5, ".meta") == 0) {
    out << first << '\n';
    std::string line;
    while (std::getline(is, line)) out << line << '\n';
    return out.str();
  }
  throw IoError("unrecognized artifact format in '" + path + "'");
}

}  // namespace dfk

#pragma once

// Experiment pipeline: one declarative config file describes the plant, the
// data-acquisition experiment, the basis, prior estimation, controller
// design, closed-loop simulation, and batch settings.  The run_* stages are
// in-memory; the cmd_* wrappers add file I/O and are what the command-line
// front end calls.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dfk/closedloop.hpp"
#include "dfk/config.hpp"
#include "dfk/dataset.hpp"
#include "dfk/design.hpp"
#include "dfk/estimate.hpp"
#include "dfk/plant.hpp"

namespace dfk {

struct PipelineConfig {
  // Plant selection and physical parameters.
  std::string plant_kind = "duffing";  // "duffing" | "two_link" | "linear"
  double duffing_alpha1 = -1.0;
  double duffing_alpha2 = 1.0;
  double duffing_beta = 0.2;
  double arm_l1 = 0.8, arm_l2 = 0.7;
  double arm_m1 = 2.5, arm_m2 = 2.0;
  double arm_g = 9.81;
  double linear_a = -1.0, linear_b = 1.0;  // scalar fixture x' = a x + b u

  // Acquisition experiment.
  Excitation excitation;
  std::size_t L = 0;
  double Ts = 0.0;
  std::size_t substeps = 10;
  std::vector<double> x0;  // empty = rest
  NoiseSpec state_noise;
  NoiseSpec input_noise;
  SchedulingMap scheduling;    // identity | first_state_squared | output_delay
  std::size_t output_index = 0;  // channel feeding the delayed-output pair

  // Gain-surface basis (polynomial family).
  std::size_t degree = 6;

  // Prior estimation and overrides.
  EstimateOptions estimate;
  double delta_override = -1.0;   // >= 0 replaces the estimated delta
  double delta_scale = 1.0;       // multiplies the (possibly overridden) delta
  double floor_margin = 1.02;     // raises estimated delta to margin * minimax
                                  // fit error when below it; 0 disables
  double lambda_s_override = -1.0;  // > 0 replaces the estimated lambda_S

  // Design stage.
  DesignOptions design;

  // Closed-loop simulation.
  std::size_t sim_steps = 0;
  double sim_Ts = 0.0;  // 0 = acquisition Ts
  ReferenceSpec reference;
  NoiseSpec sim_noise;
  SimulateOptions sim;

  // Batch experiments.
  std::size_t trials = 0;
  std::uint64_t batch_seed = 0;

  PlantModel plant() const;
  void validate() const;
};

// Parse + validate; `parse_pipeline_config` consumes the map and rejects
// unknown keys via ConfigMap::finish().
PipelineConfig parse_pipeline_config(ConfigMap& map);
PipelineConfig load_pipeline_config(const std::string& path);

// Deterministic seed for batch trial `index`, and the rederivation of every
// per-stage seed in the config from one master seed (used by --seed and by
// the batch harness so that a single trial is reproducible in isolation).
std::uint64_t trial_seed(std::uint64_t batch_seed, std::size_t index);
void override_seeds(PipelineConfig& cfg, std::uint64_t seed);

// Excite the configured plant and record the scheduling/state/input samples.
LpvDataset run_acquire(const PipelineConfig& cfg);

struct DesignArtifacts {
  std::vector<PriorBounds> priors;        // one per input channel
  std::vector<Controller> controllers;    // one per input channel
  std::vector<DesignReport> reports;
};

// Estimate priors and design one controller per input channel.
DesignArtifacts run_design(const LpvDataset& data, const PipelineConfig& cfg);

// Closed-loop run of the configured plant under the given controllers.
ClosedLoopRun run_simulation(const std::vector<Controller>& controllers,
                             const PipelineConfig& cfg);

// One acquire -> estimate -> design -> simulate cycle per trial, seeds
// derived from cfg.batch_seed and the trial index.  Per-trial failures
// (divergence, infeasible designs) are recorded, never rethrown.
MonteCarloSummary run_monte_carlo(const PipelineConfig& cfg);
MonteCarloSummary run_monte_carlo(const PipelineConfig& cfg,
                                  std::size_t n_trials);

// Path of the controller file for one input channel: the out path itself for
// single-input plants, `<stem>_ch<j+1><ext>` otherwise.
std::string channel_path(const std::string& out_path, std::size_t channel,
                         std::size_t n_channels);

// Command wrappers: parse config, run the stage, persist artifacts, and
// print a short summary to stdout.  A nonnegative `seed` rederives every
// configured seed; a nonnegative `trials` overrides the batch size.
void cmd_acquire(const std::string& config_path, const std::string& out_path,
                 std::int64_t seed = -1);
void cmd_design(const std::string& dataset_path, const std::string& config_path,
                const std::string& out_path);
void cmd_simulate(const std::vector<std::string>& controller_paths,
                  const std::string& config_path, const std::string& out_path,
                  std::int64_t seed = -1);
void cmd_montecarlo(const std::string& config_path, const std::string& out_path,
                    std::int64_t seed = -1, std::int64_t trials = -1);

// Human-readable digest of any artifact the toolkit writes: dataset CSV,
// controller file, closed-loop run CSV, or a text report/summary.
std::string describe_artifact(const std::string& path);

}  // namespace dfk

// Command-line front end for the LPV gain-surface toolkit.  Subcommands
// chain the experiment pipeline: acquire a dataset from a simulated plant,
// design gain-surface controllers from it, run the closed loop, batch the
// whole cycle, and summarize any artifact on disk.
//
// Exit codes: 0 success, 2 configuration/validation failure, 3 infeasible
// design, 4 closed-loop divergence, 5 I/O failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfk/errors.hpp"
#include "dfk/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitIo = 5;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven LPV feedback-controller toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string dataset_path;
  std::vector<std::string> controller_paths;
  std::string artifact_path;
  std::int64_t seed = -1;
  std::int64_t trials = -1;

  CLI::App* acquire =
      app.add_subcommand("acquire", "Simulate the configured experiment and "
                                    "record a dataset CSV (+ .meta sidecar)");
  acquire->add_option("--config", config_path, "experiment config file")
      ->required();
  acquire->add_option("--out", out_path, "dataset CSV to write")->required();
  acquire->add_option("--seed", seed, "rederive every configured seed");

  CLI::App* design =
      app.add_subcommand("design", "Estimate priors and design one "
                                   "controller per input channel");
  design->add_option("--dataset", dataset_path, "dataset CSV to design from")
      ->required();
  design->add_option("--config", config_path, "experiment config file")
      ->required();
  design->add_option("--out", out_path,
                     "controller file to write (per-channel suffixes when "
                     "the plant has several inputs)")
      ->required();

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the closed loop under saved "
                                     "controllers and record the trajectory");
  simulate
      ->add_option("--controller", controller_paths,
                   "controller file (repeat once per input channel)")
      ->required();
  simulate->add_option("--config", config_path, "experiment config file")
      ->required();
  simulate->add_option("--out", out_path, "run CSV to write")->required();
  simulate->add_option("--seed", seed, "rederive every configured seed");

  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "Repeat acquire/design/simulate over "
                                       "seeded trials and aggregate metrics");
  montecarlo->add_option("--config", config_path, "experiment config file")
      ->required();
  montecarlo->add_option("--out", out_path, "summary file to write")
      ->required();
  montecarlo->add_option("--seed", seed, "override the batch seed");
  montecarlo->add_option("--trials", trials, "override the trial count");

  CLI::App* report = app.add_subcommand(
      "report", "Print a human-readable digest of a toolkit artifact");
  report->add_option("artifact", artifact_path, "artifact file to describe")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (acquire->parsed()) {
      dfk::cmd_acquire(config_path, out_path, seed);
    } else if (design->parsed()) {
      dfk::cmd_design(dataset_path, config_path, out_path);
    } else if (simulate->parsed()) {
      dfk::cmd_simulate(controller_paths, config_path, out_path, seed);
    } else if (montecarlo->parsed()) {
      dfk::cmd_montecarlo(config_path, out_path, seed, trials);
    } else if (report->parsed()) {
      std::cout << dfk::describe_artifact(artifact_path);
    }
  } catch (const dfk::InfeasibleError& err) {
    std::cerr << "infeasible: " << err.what() << '\n';
    return kExitInfeasible;
  } catch (const dfk::DivergenceError& err) {
    std::cerr << "divergence at step " << err.step << ": " << err.what()
              << '\n';
    return kExitDivergence;
  } catch (const dfk::IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kExitIo;
  } catch (const dfk::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const dfk::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "unexpected error: " << err.what() << '\n';
    return kExitConfig;
  }
  return 0;
}

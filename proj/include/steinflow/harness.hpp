#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steinflow/config.hpp"
#include "steinflow/dynamics.hpp"
#include "steinflow/targets.hpp"

namespace steinflow {

/// Everything a run needs beyond the setup: the target, the seeded initial
/// ensemble, and reference assets for the requested metrics.
struct TargetBundle {
  ScoreModel model;
  Ensemble init;
  std::optional<GaussianInfo> target_moments;
  std::shared_ptr<const Eigen::VectorXd> w1_reference;  // sorted, mixture only
};

/// Builds the target and draws the initial ensemble. `run_rng` must be the
/// run's main stream (the initial sample is its first consumer); reference
/// data depend only on setup.data_seed.
TargetBundle build_target(const RunSetup& setup, Rng& run_rng);

/// Initial kernel under the configured bandwidth policy.
KernelSpec initial_kernel(const RunSetup& setup, const Ensemble& init);

/// Metric callbacks for the requested metric names (ksd2/bandwidths are
/// logged by the driver itself and yield no extra callbacks here).
std::vector<NamedMetric> build_metrics(const RunSetup& setup, const TargetBundle& bundle);

struct RunOutcome {
  bool ok = false;
  std::string error;
  long error_iteration = -1;
  RunRecord record;
};

/// Executes one full run (no file output).
RunOutcome execute_run(const RunSetup& setup);

/// CLI entry points; return the process exit status.
int cmd_run(const std::string& config_path, const CliOverrides& cli);
int cmd_sweep(const std::string& config_path, const CliOverrides& cli);
int cmd_validate(const std::string& config_path);
int cmd_presets();

}  // namespace steinflow

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "steinflow/ensemble.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/rng.hpp"
#include "steinflow/stein.hpp"

namespace steinflow {

enum class ScheduleKind { Fixed, AdaGrad };

/// Per-coordinate step-size rule. AdaGrad keeps a decaying accumulator of
/// squared transport directions per particle and coordinate; the first update
/// seeds the accumulator with the squared direction itself.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::Fixed;
  double gamma = 0.1;
  double alpha = 0.9;  // accumulator decay (AdaGrad)
  double fudge = 1e-6;
  Eigen::MatrixXd accumulator;  // M x d once initialized
  bool initialized = false;

  static StepSchedule fixed(double gamma);
  static StepSchedule adagrad(double gamma, double alpha = 0.9, double fudge = 1e-6);
};

enum class MethodKind { FixedBandwidth, MedianHeuristic, Adaptive };

struct MethodConfig {
  MethodKind method = MethodKind::FixedBandwidth;
  double s = 0.0;            // kernel-parameter ascent step size
  int nstepstheta = 1;       // ascent steps per parameter update
  long paramupdate_every = 1;
  long median_refresh_every = 1;
  KsdVariant variant = KsdVariant::U;
  ParamSpace param_space = ParamSpace::Log;
  int ksd_subsample = 0;
  MedianNorm median_norm = MedianNorm::Euclidean;
};

/// One transport step with a fixed kernel: x_i += scale * (1/M) sum_j
/// [k(x_i,x_j) score_j + grad_{x_j} k(x_i,x_j)]. The pair sum runs in
/// value-sorted particle order, so a stored-order permutation of the input
/// permutes the output bitwise.
Ensemble svgd_step(const Ensemble& ens, const KernelSpec& spec, const ScoreCache& cache,
                   StepSchedule& schedule);
Ensemble svgd_step(const Ensemble& ens, const KernelSpec& spec, const ScoreModel& model,
                   StepSchedule& schedule);

/// A logged diagnostic; fn returns one value per column.
struct NamedMetric {
  std::vector<std::string> columns;
  std::function<Eigen::VectorXd(const Ensemble&)> fn;

  static NamedMetric scalar(std::string name, std::function<double(const Ensemble&)> f);
};

struct RunOptions {
  long nsteps = 0;
  long log_every = 1;
};

struct RunRecord {
  std::vector<std::string> columns;  // ksd2, bandwidths, then metric names
  std::vector<long> logged_iterations;
  std::vector<std::vector<double>> rows;  // one row per logged iteration
  Ensemble final_ensemble;
  KernelSpec final_kernel;
  long iterations = 0;
  long score_evaluations = 0;
  double wall_seconds = 0.0;
};

/// Adaptive-SVGD driver. Each iteration builds the score cache once, runs the
/// configured number of KSD ascent steps on the kernel parameters when due
/// (every paramupdate_every iterations, starting with the first), then moves
/// the particles with the same cache. The median method instead refreshes the
/// shared bandwidth from the current ensemble. State is logged at iteration 0,
/// every log_every iterations, and at the final iteration.
RunRecord run_svgd(Ensemble ens, KernelSpec spec, const ScoreModel& model,
                   const MethodConfig& method, StepSchedule schedule,
                   const RunOptions& options, Rng& rng,
                   const std::vector<NamedMetric>& metrics = {});

}  // namespace steinflow

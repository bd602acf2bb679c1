#pragma once

#include <Eigen/Dense>

#include "steinflow/ensemble.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/rng.hpp"

namespace steinflow {

/// Target scores evaluated once per ensemble and shared between the
/// discrepancy estimate and the particle update.
struct ScoreCache {
  Eigen::MatrixXd scores;  // M x d, row i = score at particle i

  static ScoreCache build(const ScoreModel& model, const Ensemble& ens);
};

enum class KsdVariant { U, V };

struct KsdOptions {
  KsdVariant variant = KsdVariant::U;
  ParamSpace param_space = ParamSpace::Log;
  int subsample = 0;  // 0 = use every particle
  bool with_grads = true;
};

struct SteinEstimate {
  double ksd2 = 0.0;
  Eigen::VectorXd grad;  // d(KSD^2)/d(theta) in the active parameter space
  KsdVariant variant = KsdVariant::U;
  long pairs_used = 0;
};

/// Stein kernel u(x,y) = k s_x.s_y + s_y.grad_x k + s_x.grad_y k + Tr, with
/// optional derivative with respect to the kernel log-bandwidths.
struct SteinPairEval {
  double u = 0.0;
  Eigen::VectorXd du_dtheta;  // filled when requested
};

SteinPairEval stein_pair(const KernelSpec& spec, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& score_x,
                         const Eigen::VectorXd& score_y, bool with_param_grads = false);

/// Pairwise discrepancy estimate. The U-statistic skips the diagonal and may
/// be negative; the V-statistic includes it and requires p = 2. Accumulation
/// follows the value-sorted particle order, so the result is bitwise
/// independent of particle storage order. `rng` is consumed only when
/// 0 < subsample < M.
SteinEstimate ksd_squared(const KernelSpec& spec, const Ensemble& ens,
                          const ScoreCache& cache, const KsdOptions& options,
                          Rng* rng = nullptr);

/// One gradient-ascent step on KSD^2 in kernel parameters. A zero step size
/// returns the kernel unchanged without evaluating (and without consuming rng).
/// In the linear space the bandwidths are clamped at h_min = 1e-8.
KernelSpec ksd_ascent_step(const KernelSpec& spec, const Ensemble& ens,
                           const ScoreCache& cache, double step,
                           const KsdOptions& options, Rng* rng = nullptr,
                           SteinEstimate* estimate_out = nullptr);

}  // namespace steinflow

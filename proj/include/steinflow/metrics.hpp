#pragma once

#include <Eigen/Dense>

#include "steinflow/ensemble.hpp"

namespace steinflow {

struct MomentSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased, divisor M-1
  Eigen::VectorXd marginal_var;
  double trace = 0.0;
};

/// Exact integral of |F_a - F_b| for two empirical CDFs. Inputs must be
/// sorted ascending; for equal sizes this is the mean absolute difference of
/// the order statistics.
double wasserstein1_1d(const Eigen::VectorXd& a_sorted, const Eigen::VectorXd& b_sorted);

/// Wasserstein-2 distance between Gaussians:
/// sqrt(|mu1-mu2|^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)).
double bures_w2(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2);

/// Mean over particles of sum_i x_i^2 * sigma_inv_diag_i; expectation d under
/// the matching Gaussian.
double chi2_statistic(const Ensemble& ens, const Eigen::VectorXd& sigma_inv_diag);

MomentSummary moment_summary(const Ensemble& ens);

/// Column i divided by target_sds[i] (for histogram and Q-Q exports).
Eigen::MatrixXd normalized_marginals(const Ensemble& ens, const Eigen::VectorXd& target_sds);

}  // namespace steinflow

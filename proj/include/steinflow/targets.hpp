#pragma once

#include <Eigen/Dense>

#include "steinflow/ensemble.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/rng.hpp"

namespace steinflow {

/// One-dimensional Gaussian mixture with normalized weights.
struct GaussianMixture {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  Eigen::VectorXd variances;

  static GaussianMixture make(const Eigen::VectorXd& weights, const Eigen::VectorXd& means,
                              const Eigen::VectorXd& variances);
};

double mixture_log_density(const GaussianMixture& gm, double x);
/// Responsibility-weighted score d/dx log pi(x).
double mixture_score(const GaussianMixture& gm, double x);
double sample_mixture(const GaussianMixture& gm, Rng& rng);
Ensemble sample_mixture(const GaussianMixture& gm, Rng& rng, int m);

/// The two-mode benchmark target (1/3) N(-2,1) + (2/3) N(2,1).
GaussianMixture mixture1d();
ScoreModel mixture_target(const GaussianMixture& gm);

/// N(0, diag(1, 1/4, 1/9, ..., 1/d^2)): marginal variance 1/i^2 in dimension i.
ScoreModel diag_gaussian_target(int d);
Ensemble sample_diag_gaussian(Rng& rng, int m, int d);

/// Linear-Gaussian inverse problem y = F x + noise with diagonal noise and
/// prior covariances; the posterior is Gaussian and available in closed form.
struct LinearGaussianInverse {
  Eigen::MatrixXd forward;    // N_obs x N_x
  Eigen::VectorXd data;       // N_obs
  Eigen::VectorXd noise_var;  // diagonal of the noise covariance
  Eigen::VectorXd prior_var;  // diagonal of the prior covariance

  void check() const;
};

Eigen::VectorXd linear_gaussian_score(const LinearGaussianInverse& prob,
                                      const Eigen::VectorXd& x);
/// Unnormalized log posterior density (for derivative checks).
double linear_gaussian_log_density(const LinearGaussianInverse& prob,
                                   const Eigen::VectorXd& x);
/// mu = Sigma F' Gamma^-1 y, Sigma = (F' Gamma^-1 F + Gamma0^-1)^-1, densely.
GaussianInfo exact_posterior(const LinearGaussianInverse& prob);
ScoreModel linear_gaussian_target(const LinearGaussianInverse& prob);
Ensemble sample_prior(const LinearGaussianInverse& prob, Rng& rng, int m);

/// Source recovery for -f'' + f = u on (0,1) with zero boundary values, u in
/// a truncated sine basis sqrt(2) sin(pi k s) with coefficient prior
/// variances kl_scale * k^-2, observed on the uniform grid j / n_obs.
struct OdeProblemSpec {
  int r = 8;  // mesh width 2^-r
  int n_obs = 256;
  int n_x = 16;
  double kl_scale = 50.0;
  double noise_var = 1e-3;
};

struct InverseProblem {
  LinearGaussianInverse inverse;
  Eigen::VectorXd x_ref;  // coefficient draw behind the data
  Eigen::VectorXd y_ref;  // noise-free forward image, equals inverse.data
};

/// Forward map from sine coefficients to observed solution values; the final
/// observation sits on the boundary and is identically zero.
Eigen::MatrixXd ode_forward_matrix(const OdeProblemSpec& spec);
InverseProblem build_ode_problem(const OdeProblemSpec& spec, Rng& rng);

/// Regression onto the same sine basis: A_{ik} = sqrt(2) sin(k pi i / n_y),
/// prior variances k^-2, unit observation noise.
struct GpProblemSpec {
  int n_x = 16;
  int n_y = 64;
};

InverseProblem build_gp_problem(const GpProblemSpec& spec, Rng& rng);

}  // namespace steinflow

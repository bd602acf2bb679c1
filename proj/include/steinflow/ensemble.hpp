#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "steinflow/rng.hpp"

namespace steinflow {

/// A set of M particles in R^d, one per row. Particle order carries no
/// meaning; all consumers are permutation-equivariant.
struct Ensemble {
  Eigen::MatrixXd particles;  // M x d

  Ensemble() = default;
  explicit Ensemble(Eigen::MatrixXd p);

  int count() const { return static_cast<int>(particles.rows()); }
  int dim() const { return static_cast<int>(particles.cols()); }

  /// Throws numeric_error if any coordinate is NaN/Inf.
  void check_finite() const;
};

/// M i.i.d. draws from N(mean, diag(sd)^2). Coordinates are drawn particle by
/// particle, dimension by dimension, so the layout is seed-stable.
Ensemble sample_gaussian(Rng& rng, int m, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& sd);

/// Exact mean/covariance of a Gaussian target, carried by score models that
/// know they are Gaussian (enables closed-form posterior diagnostics).
struct GaussianInfo {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// A target distribution seen only through its score x -> grad log pi(x).
struct ScoreModel {
  int dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> score;
  std::string description;
  std::optional<GaussianInfo> gaussian_info;
};

/// Lexicographic-by-coordinates ordering of particle indices. Pairwise sums
/// accumulated in this order are invariant under particle permutation, which
/// makes permutation equivariance of the dynamics hold bit-exactly.
std::vector<int> canonical_order(const Ensemble& ens);

}  // namespace steinflow

#pragma once

#include <Eigen/Dense>

#include "steinflow/ensemble.hpp"

namespace steinflow {

enum class KernelFamily { Isotropic, Product };

/// Parameter space used for bandwidth optimization. Log keeps h > 0 without
/// clamping; Linear updates h directly and clamps at h_min.
enum class ParamSpace { Log, Linear };

enum class MedianNorm { Euclidean, PNorm };

/// k(x,y) = prod_i exp(-|x_i - y_i|^p / h_i), with a single shared h for the
/// isotropic family. Bandwidths are stored as logarithms so they stay positive
/// under unconstrained gradient ascent.
struct KernelSpec {
  KernelFamily family = KernelFamily::Isotropic;
  int p = 2;  // exponent, 1 or 2
  Eigen::VectorXd log_bandwidths;

  static KernelSpec isotropic(int p, double h);
  static KernelSpec product(int p, const Eigen::VectorXd& h);

  int param_count() const { return static_cast<int>(log_bandwidths.size()); }
  /// h_i for dimension i (shared value if isotropic).
  double bandwidth(int i) const;
  Eigen::VectorXd bandwidths(int d) const;
  /// Parameter index owning dimension i (0 for isotropic, i for product).
  int param_of_dim(int i) const { return family == KernelFamily::Isotropic ? 0 : i; }

  void check(int d) const;
};

/// Kernel value and derivatives at a pair of points. Parameter derivatives
/// (rows = kernel parameters) are filled only when requested.
struct KernelEval {
  double value = 0.0;
  Eigen::VectorXd grad_x;  // d
  Eigen::VectorXd grad_y;  // d, equals -grad_x
  double trace_xy = 0.0;   // Tr of the mixed second derivative

  bool has_param_grads = false;
  Eigen::VectorXd d_value;   // n_params
  Eigen::MatrixXd d_grad_x;  // n_params x d
  Eigen::MatrixXd d_grad_y;  // n_params x d
  Eigen::VectorXd d_trace;   // n_params
};

/// Closed-form evaluation; parameter derivatives are with respect to log h_i.
/// At coordinates with x_i = y_i and p = 1 the convention sign(0) = 0 applies.
KernelEval kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y, bool with_param_grads = false);

/// h = med^p / log(M-1), med the lower median of the M(M-1)/2 pairwise
/// distances (Euclidean by default; optionally the l_p distance).
double median_heuristic(const Ensemble& ens, int p,
                        MedianNorm norm = MedianNorm::Euclidean);

/// Per-pair transport summand k(x_i,x_j) * score_j + grad_{x_j} k(x_i,x_j).
Eigen::VectorXd svgd_direction_terms(const KernelSpec& spec,
                                     const Eigen::VectorXd& x_i,
                                     const Eigen::VectorXd& x_j,
                                     const Eigen::VectorXd& score_j);

}  // namespace steinflow

#pragma once

#include <Eigen/Dense>

namespace steinflow {

/// Real symmetric matrix; symmetrized exactly on construction.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& a);

  const Eigen::MatrixXd& mat() const { return m_; }
  int size() const { return static_cast<int>(m_.rows()); }

 private:
  Eigen::MatrixXd m_;
};

struct EigDecomp {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// A = V diag(values) V^T.
EigDecomp sym_eig(const SymMatrix& a);

/// Symmetric PSD square root; eigenvalues in [-1e-10*|lambda|_max, 0) are
/// clamped to 0, anything lower is a not-PSD error.
SymMatrix sym_sqrt(const SymMatrix& a);

/// Thomas algorithm for T x = rhs with T tridiagonal (lower/upper have
/// length n-1). Requires nonzero pivots, which diagonal dominance gives.
Eigen::VectorXd solve_tridiag(const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& diag,
                              const Eigen::VectorXd& upper,
                              const Eigen::VectorXd& rhs);

}  // namespace steinflow

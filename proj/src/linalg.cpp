#include "steinflow/linalg.hpp"

#include <cmath>

#include "steinflow/common.hpp"

namespace steinflow {

SymMatrix::SymMatrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw parameter_error("SymMatrix: matrix must be square and non-empty");
  }
  if (!a.allFinite()) throw numeric_error("SymMatrix: non-finite entries");
  m_ = 0.5 * (a + a.transpose());
}

EigDecomp sym_eig(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw numeric_error("sym_eig: eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix sym_sqrt(const SymMatrix& a) {
  EigDecomp eig = sym_eig(a);
  const double lam_max = eig.values.cwiseAbs().maxCoeff();
  const double floor = -1e-10 * std::max(lam_max, 1.0e-300);
  Eigen::VectorXd roots(eig.values.size());
  for (int i = 0; i < eig.values.size(); ++i) {
    const double lam = eig.values(i);
    if (lam < floor) {
      throw numeric_error("sym_sqrt: matrix is not positive semidefinite");
    }
    roots(i) = lam > 0.0 ? std::sqrt(lam) : 0.0;
  }
  return SymMatrix(eig.vectors * roots.asDiagonal() * eig.vectors.transpose());
}

Eigen::VectorXd solve_tridiag(const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& diag,
                              const Eigen::VectorXd& upper,
                              const Eigen::VectorXd& rhs) {
  const int n = static_cast<int>(diag.size());
  if (n < 1) throw parameter_error("solve_tridiag: empty system");
  if (lower.size() != n - 1 || upper.size() != n - 1 || rhs.size() != n) {
    throw parameter_error("solve_tridiag: band/rhs sizes inconsistent");
  }
  Eigen::VectorXd c(n), dvec(n);
  double pivot = diag(0);
  if (pivot == 0.0) throw numeric_error("solve_tridiag: zero pivot at row 0");
  c(0) = n > 1 ? upper(0) / pivot : 0.0;
  dvec(0) = rhs(0) / pivot;
  for (int i = 1; i < n; ++i) {
    pivot = diag(i) - lower(i - 1) * c(i - 1);
    if (pivot == 0.0) {
      throw numeric_error("solve_tridiag: zero pivot at row " + std::to_string(i));
    }
    c(i) = i < n - 1 ? upper(i) / pivot : 0.0;
    dvec(i) = (rhs(i) - lower(i - 1) * dvec(i - 1)) / pivot;
  }
  Eigen::VectorXd x(n);
  x(n - 1) = dvec(n - 1);
  for (int i = n - 2; i >= 0; --i) {
    x(i) = dvec(i) - c(i) * x(i + 1);
  }
  return x;
}

}  // namespace steinflow

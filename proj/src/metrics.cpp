#include "steinflow/metrics.hpp"

#include <cmath>
#include <vector>

#include "steinflow/common.hpp"
#include "steinflow/linalg.hpp"

namespace steinflow {

namespace {

void require_sorted(const Eigen::VectorXd& v, const char* name) {
  if (v.size() == 0) throw parameter_error(std::string(name) + " sample is empty");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw parameter_error(std::string(name) + " sample contains non-finite values");
    if (i > 0 && v[i] < v[i - 1])
      throw parameter_error(std::string(name) + " sample must be sorted ascending");
  }
}

}  // namespace

double wasserstein1_1d(const Eigen::VectorXd& a_sorted, const Eigen::VectorXd& b_sorted) {
  require_sorted(a_sorted, "first");
  require_sorted(b_sorted, "second");
  const Eigen::Index na = a_sorted.size(), nb = b_sorted.size();
  const double wa = 1.0 / static_cast<double>(na), wb = 1.0 / static_cast<double>(nb);
  // Walk the merged breakpoints; between consecutive points the CDF difference
  // is constant.
  Eigen::Index ia = 0, ib = 0;
  double w1 = 0.0, fa = 0.0, fb = 0.0;
  double cur = 0.0;
  bool have_cur = false;
  while (ia < na || ib < nb) {
    double next;
    if (ib >= nb || (ia < na && a_sorted[ia] <= b_sorted[ib]))
      next = a_sorted[ia];
    else
      next = b_sorted[ib];
    if (have_cur) w1 += std::abs(fa - fb) * (next - cur);
    while (ia < na && a_sorted[ia] == next) {
      fa += wa;
      ++ia;
    }
    while (ib < nb && b_sorted[ib] == next) {
      fb += wb;
      ++ib;
    }
    cur = next;
    have_cur = true;
  }
  return w1;
}

double bures_w2(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2) {
  const Eigen::Index d = mu1.size();
  if (mu2.size() != d || cov1.rows() != d || cov1.cols() != d || cov2.rows() != d ||
      cov2.cols() != d)
    throw parameter_error("Gaussian parameters must share one dimension");
  const Eigen::MatrixXd root1 = sym_sqrt(SymMatrix(cov1)).mat();
  const Eigen::MatrixXd inner = root1 * cov2 * root1;
  const Eigen::MatrixXd cross = sym_sqrt(SymMatrix(inner)).mat();
  double sq = (mu1 - mu2).squaredNorm() + cov1.trace() + cov2.trace() - 2.0 * cross.trace();
  if (sq < 0.0) sq = 0.0;  // roundoff guard; the exact value is nonnegative
  return std::sqrt(sq);
}

double chi2_statistic(const Ensemble& ens, const Eigen::VectorXd& sigma_inv_diag) {
  if (sigma_inv_diag.size() != ens.dim())
    throw parameter_error("inverse-variance vector must match the ensemble dimension");
  const std::vector<int> order = canonical_order(ens);
  double total = 0.0;
  for (int idx : order) {
    double v = 0.0;
    for (int c = 0; c < ens.dim(); ++c) {
      const double x = ens.particles(idx, c);
      v += x * x * sigma_inv_diag[c];
    }
    total += v;
  }
  return total / static_cast<double>(ens.count());
}

MomentSummary moment_summary(const Ensemble& ens) {
  const int m = ens.count();
  const int d = ens.dim();
  if (m < 2) throw parameter_error("moment summary needs at least 2 particles");
  const std::vector<int> order = canonical_order(ens);

  MomentSummary out;
  out.mean = Eigen::VectorXd::Zero(d);
  for (int idx : order) out.mean += ens.particles.row(idx).transpose();
  out.mean /= static_cast<double>(m);

  out.cov = Eigen::MatrixXd::Zero(d, d);
  for (int idx : order) {
    const Eigen::VectorXd z = ens.particles.row(idx).transpose() - out.mean;
    out.cov += z * z.transpose();
  }
  out.cov /= static_cast<double>(m - 1);
  out.marginal_var = out.cov.diagonal();
  out.trace = out.cov.trace();
  return out;
}

Eigen::MatrixXd normalized_marginals(const Ensemble& ens, const Eigen::VectorXd& target_sds) {
  if (target_sds.size() != ens.dim())
    throw parameter_error("standard-deviation vector must match the ensemble dimension");
  for (Eigen::Index i = 0; i < target_sds.size(); ++i)
    if (!(target_sds[i] > 0.0))
      throw parameter_error("target standard deviations must be positive");
  Eigen::MatrixXd out = ens.particles;
  for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) /= target_sds[c];
  return out;
}

}  // namespace steinflow

#include "steinflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "steinflow/common.hpp"

namespace steinflow {

namespace {

double sign0(double v) { return (v > 0.0) - (v < 0.0); }

void require_positive_finite(double h, const char* what) {
  if (!std::isfinite(h) || h <= 0.0)
    throw parameter_error(std::string(what) + " must be positive and finite");
}

}  // namespace

KernelSpec KernelSpec::isotropic(int p, double h) {
  require_positive_finite(h, "bandwidth");
  KernelSpec spec;
  spec.family = KernelFamily::Isotropic;
  spec.p = p;
  spec.log_bandwidths = Eigen::VectorXd::Constant(1, std::log(h));
  spec.check(1);
  return spec;
}

KernelSpec KernelSpec::product(int p, const Eigen::VectorXd& h) {
  if (h.size() == 0) throw parameter_error("product kernel needs at least one bandwidth");
  KernelSpec spec;
  spec.family = KernelFamily::Product;
  spec.p = p;
  spec.log_bandwidths.resize(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    require_positive_finite(h[i], "bandwidth");
    spec.log_bandwidths[i] = std::log(h[i]);
  }
  spec.check(static_cast<int>(h.size()));
  return spec;
}

double KernelSpec::bandwidth(int i) const {
  return std::exp(log_bandwidths[family == KernelFamily::Isotropic ? 0 : i]);
}

Eigen::VectorXd KernelSpec::bandwidths(int d) const {
  Eigen::VectorXd h(d);
  for (int i = 0; i < d; ++i) h[i] = bandwidth(i);
  return h;
}

void KernelSpec::check(int d) const {
  if (p != 1 && p != 2) throw parameter_error("kernel exponent p must be 1 or 2");
  const int n = param_count();
  if (family == KernelFamily::Isotropic) {
    if (n != 1) throw parameter_error("isotropic kernel carries exactly one bandwidth");
  } else {
    if (n != d)
      throw parameter_error("product kernel needs one bandwidth per dimension (" +
                            std::to_string(n) + " given for dimension " + std::to_string(d) + ")");
  }
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(log_bandwidths[i]))
      throw parameter_error("kernel log-bandwidths must be finite");
}

KernelEval kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y, bool with_param_grads) {
  const int d = static_cast<int>(x.size());
  if (y.size() != d) throw parameter_error("kernel arguments must share a dimension");
  spec.check(d);

  Eigen::VectorXd g(d), c(d), q(d);
  double qsum = 0.0;
  for (int i = 0; i < d; ++i) {
    const double h = spec.bandwidth(i);
    const double diff = x[i] - y[i];
    if (spec.p == 1) {
      q[i] = std::abs(diff) / h;
      g[i] = sign0(diff) / h;
      c[i] = 0.0;
    } else {
      q[i] = diff * diff / h;
      g[i] = 2.0 * diff / h;
      c[i] = 2.0 / h;
    }
    qsum += q[i];
  }
  // k underflows to exactly 0 past 745; treat the pair as fully detached so a
  // degenerate bandwidth cannot produce inf * 0 (also catches qsum = inf/nan)
  if (!(qsum < 745.0)) {
    KernelEval dead;
    dead.value = 0.0;
    dead.grad_x = Eigen::VectorXd::Zero(d);
    dead.grad_y = Eigen::VectorXd::Zero(d);
    dead.trace_xy = 0.0;
    if (with_param_grads) {
      dead.has_param_grads = true;
      const int n = spec.param_count();
      dead.d_value = Eigen::VectorXd::Zero(n);
      dead.d_grad_x = Eigen::MatrixXd::Zero(n, d);
      dead.d_grad_y = Eigen::MatrixXd::Zero(n, d);
      dead.d_trace = Eigen::VectorXd::Zero(n);
    }
    return dead;
  }
  const double k = std::exp(-qsum);

  KernelEval out;
  out.value = k;
  out.grad_x = -k * g;
  out.grad_y = k * g;
  double curv = 0.0;
  for (int i = 0; i < d; ++i) curv += c[i] - g[i] * g[i];
  out.trace_xy = k * curv;

  if (!with_param_grads) return out;
  out.has_param_grads = true;
  const int n = spec.param_count();
  out.d_value.resize(n);
  out.d_grad_x.resize(n, d);
  out.d_grad_y.resize(n, d);
  out.d_trace.resize(n);
  if (spec.family == KernelFamily::Product) {
    for (int m = 0; m < n; ++m) {
      out.d_value[m] = k * q[m];
      for (int i = 0; i < d; ++i)
        out.d_grad_x(m, i) = -k * g[i] * (q[m] - (i == m ? 1.0 : 0.0));
      out.d_trace[m] = q[m] * out.trace_xy + k * (2.0 * g[m] * g[m] - c[m]);
    }
  } else {
    out.d_value[0] = k * qsum;
    for (int i = 0; i < d; ++i) out.d_grad_x(0, i) = -k * g[i] * (qsum - 1.0);
    double extra = 0.0;
    for (int i = 0; i < d; ++i) extra += 2.0 * g[i] * g[i] - c[i];
    out.d_trace[0] = qsum * out.trace_xy + k * extra;
  }
  out.d_grad_y = -out.d_grad_x;
  return out;
}

double median_heuristic(const Ensemble& ens, int p, MedianNorm norm) {
  if (p != 1 && p != 2) throw parameter_error("kernel exponent p must be 1 or 2");
  const int m = ens.count();
  if (m < 3) throw parameter_error("median heuristic needs at least 3 particles");
  std::vector<double> dist;
  dist.reserve(static_cast<size_t>(m) * (m - 1) / 2);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const Eigen::VectorXd diff = ens.particles.row(a) - ens.particles.row(b);
      double dv;
      if (norm == MedianNorm::Euclidean) {
        dv = diff.norm();
      } else if (p == 1) {
        dv = diff.lpNorm<1>();
      } else {
        dv = diff.norm();
      }
      dist.push_back(dv);
    }
  }
  const size_t mid = (dist.size() - 1) / 2;  // lower median
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  const double med = dist[mid];
  if (med <= 0.0)
    throw numeric_error("median heuristic degenerate: median pairwise distance is zero");
  return std::pow(med, p) / std::log(static_cast<double>(m - 1));
}

Eigen::VectorXd svgd_direction_terms(const KernelSpec& spec, const Eigen::VectorXd& x_i,
                                     const Eigen::VectorXd& x_j,
                                     const Eigen::VectorXd& score_j) {
  if (score_j.size() != x_j.size())
    throw parameter_error("score and particle dimensions must agree");
  const KernelEval ev = kernel_eval(spec, x_i, x_j, false);
  return ev.value * score_j + ev.grad_y;
}

}  // namespace steinflow

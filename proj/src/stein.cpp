#include "steinflow/stein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "steinflow/common.hpp"

namespace steinflow {

namespace {

constexpr double kMinLinearBandwidth = 1e-8;

// Flattened row-major copy of selected ensemble rows, in the given order.
void pack_rows(const Eigen::MatrixXd& src, const std::vector<int>& order,
               std::vector<double>& out) {
  const int d = static_cast<int>(src.cols());
  out.resize(order.size() * static_cast<size_t>(d));
  double* dst = out.data();
  for (int row : order) {
    for (int c = 0; c < d; ++c) *dst++ = src(row, c);
  }
}

// Stein kernel for one pair over packed rows. Accumulates the parameter
// gradient (one slot per kernel parameter) when grad != nullptr. Scratch g/q
// must hold d doubles each.
template <int P, bool Product>
double pair_u(const double* xa, const double* xb, const double* sa, const double* sb,
              const double* inv_h, int d, double* grad, double* g, double* q) {
  double qsum = 0.0, dot = 0.0, cross = 0.0, curv = 0.0, csum = 0.0, gsq = 0.0;
  for (int i = 0; i < d; ++i) {
    const double ih = Product ? inv_h[i] : inv_h[0];
    const double diff = xa[i] - xb[i];
    double qi, gi, ci;
    if constexpr (P == 1) {
      qi = std::abs(diff) * ih;
      gi = ((diff > 0.0) - (diff < 0.0)) * ih;
      ci = 0.0;
    } else {
      qi = diff * diff * ih;
      gi = 2.0 * diff * ih;
      ci = 2.0 * ih;
    }
    qsum += qi;
    dot += sa[i] * sb[i];
    cross += gi * (sa[i] - sb[i]);
    curv += ci - gi * gi;
    csum += ci;
    gsq += gi * gi;
    g[i] = gi;
    q[i] = qi;
  }
  // k underflows to exactly 0 past 745; bail before 1/h factors can turn a
  // degenerate bandwidth into inf * 0 (also catches qsum = inf/nan)
  if (!(qsum < 745.0)) return 0.0;
  const double k = std::exp(-qsum);
  const double u = k * (dot + cross + curv);
  if (grad) {
    if constexpr (Product) {
      for (int m = 0; m < d; ++m) {
        const double cm = P == 1 ? 0.0 : 2.0 * inv_h[m];
        grad[m] += q[m] * u + k * (2.0 * g[m] * g[m] - cm - g[m] * (sa[m] - sb[m]));
      }
    } else {
      grad[0] += qsum * u + k * (2.0 * gsq - csum - cross);
    }
  }
  return u;
}

using PairFn = double (*)(const double*, const double*, const double*, const double*,
                          const double*, int, double*, double*, double*);

PairFn select_pair_fn(int p, KernelFamily family) {
  if (p == 1)
    return family == KernelFamily::Product ? &pair_u<1, true> : &pair_u<1, false>;
  return family == KernelFamily::Product ? &pair_u<2, true> : &pair_u<2, false>;
}

std::vector<int> order_subset(const Eigen::MatrixXd& x, std::vector<int> subset) {
  if (!deterministic_mode()) return subset;
  const int d = static_cast<int>(x.cols());
  std::stable_sort(subset.begin(), subset.end(), [&](int a, int b) {
    for (int c = 0; c < d; ++c) {
      if (x(a, c) < x(b, c)) return true;
      if (x(a, c) > x(b, c)) return false;
    }
    return false;
  });
  return subset;
}

}  // namespace

ScoreCache ScoreCache::build(const ScoreModel& model, const Ensemble& ens) {
  if (model.dim != ens.dim())
    throw parameter_error("score model dimension does not match the ensemble");
  if (!model.score) throw parameter_error("score model has no score function");
  ScoreCache cache;
  cache.scores.resize(ens.count(), ens.dim());
  for (int i = 0; i < ens.count(); ++i) {
    const Eigen::VectorXd s = model.score(ens.particles.row(i).transpose());
    if (s.size() != ens.dim())
      throw numeric_error("score returned a vector of the wrong dimension");
    if (!s.allFinite())
      throw numeric_error("score evaluation produced non-finite values at particle " +
                          std::to_string(i));
    cache.scores.row(i) = s.transpose();
  }
  return cache;
}

SteinPairEval stein_pair(const KernelSpec& spec, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& score_x,
                         const Eigen::VectorXd& score_y, bool with_param_grads) {
  if (score_x.size() != x.size() || score_y.size() != y.size())
    throw parameter_error("score and point dimensions must agree");
  const KernelEval ev = kernel_eval(spec, x, y, with_param_grads);
  SteinPairEval out;
  out.u = ev.value * score_x.dot(score_y) + score_y.dot(ev.grad_x) +
          score_x.dot(ev.grad_y) + ev.trace_xy;
  if (with_param_grads) {
    const int n = spec.param_count();
    out.du_dtheta.resize(n);
    for (int m = 0; m < n; ++m) {
      out.du_dtheta[m] = ev.d_value[m] * score_x.dot(score_y) +
                         score_y.dot(ev.d_grad_x.row(m).transpose()) +
                         score_x.dot(ev.d_grad_y.row(m).transpose()) + ev.d_trace[m];
    }
  }
  return out;
}

SteinEstimate ksd_squared(const KernelSpec& spec, const Ensemble& ens,
                          const ScoreCache& cache, const KsdOptions& options,
                          Rng* rng) {
  const int m_all = ens.count();
  const int d = ens.dim();
  spec.check(d);
  if (cache.scores.rows() != m_all || cache.scores.cols() != d)
    throw parameter_error("score cache shape does not match the ensemble");
  if (options.variant == KsdVariant::V && spec.p != 2)
    throw parameter_error("the V-statistic requires kernel exponent p = 2");
  if (options.variant == KsdVariant::U && m_all < 2)
    throw parameter_error("the U-statistic needs at least 2 particles");
  if (m_all < 1) throw parameter_error("KSD needs at least one particle");

  // Pick the particles entering the estimate.
  std::vector<int> subset;
  if (options.subsample > 0 && options.subsample < m_all) {
    if (options.subsample < 2)
      throw parameter_error("KSD subsample needs at least 2 particles");
    if (!rng) throw parameter_error("KSD subsampling needs a random stream");
    std::vector<int> pool(m_all);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < options.subsample; ++i) {
      const int j = i + static_cast<int>(rng->uniform_index(m_all - i));
      std::swap(pool[i], pool[j]);
    }
    subset.assign(pool.begin(), pool.begin() + options.subsample);
  } else {
    subset.resize(m_all);
    std::iota(subset.begin(), subset.end(), 0);
  }
  const std::vector<int> order = order_subset(ens.particles, std::move(subset));
  const int m = static_cast<int>(order.size());

  std::vector<double> x, s;
  pack_rows(ens.particles, order, x);
  pack_rows(cache.scores, order, s);

  const int n_par = spec.param_count();
  const Eigen::VectorXd h = spec.bandwidths(d);
  std::vector<double> inv_h(spec.family == KernelFamily::Product ? d : 1);
  if (spec.family == KernelFamily::Product) {
    for (int i = 0; i < d; ++i) inv_h[i] = 1.0 / h[i];
  } else {
    inv_h[0] = 1.0 / h[0];
  }

  const PairFn pair = select_pair_fn(spec.p, spec.family);
  std::vector<double> scratch_g(d), scratch_q(d);
  std::vector<double> grad_total(options.with_grads ? n_par : 0, 0.0);
  std::vector<double> grad_row(options.with_grads ? n_par : 0);

  // Off-diagonal sum, value-sorted order, fixed per-row accumulation.
  double total = 0.0;
  for (int a = 0; a < m; ++a) {
    const double* xa = x.data() + static_cast<size_t>(a) * d;
    const double* sa = s.data() + static_cast<size_t>(a) * d;
    double row_sum = 0.0;
    double* grow = nullptr;
    if (options.with_grads) {
      std::fill(grad_row.begin(), grad_row.end(), 0.0);
      grow = grad_row.data();
    }
    for (int b = a + 1; b < m; ++b) {
      const double* xb = x.data() + static_cast<size_t>(b) * d;
      const double* sb = s.data() + static_cast<size_t>(b) * d;
      row_sum += pair(xa, xb, sa, sb, inv_h.data(), d, grow, scratch_g.data(),
                      scratch_q.data());
    }
    total += row_sum;
    if (options.with_grads)
      for (int t = 0; t < n_par; ++t) grad_total[t] += grad_row[t];
  }

  SteinEstimate est;
  est.variant = options.variant;
  if (options.variant == KsdVariant::U) {
    const double denom = static_cast<double>(m) * (m - 1);
    est.ksd2 = 2.0 * total / denom;
    est.pairs_used = static_cast<long>(m) * (m - 1) / 2;
    if (options.with_grads) {
      est.grad.resize(n_par);
      for (int t = 0; t < n_par; ++t) est.grad[t] = 2.0 * grad_total[t] / denom;
    }
  } else {
    // Diagonal terms, added in the same value-sorted order.
    double diag = 0.0;
    std::vector<double> diag_grad(options.with_grads ? n_par : 0, 0.0);
    for (int a = 0; a < m; ++a) {
      const double* xa = x.data() + static_cast<size_t>(a) * d;
      const double* sa = s.data() + static_cast<size_t>(a) * d;
      diag += pair(xa, xa, sa, sa, inv_h.data(), d,
                   options.with_grads ? diag_grad.data() : nullptr, scratch_g.data(),
                   scratch_q.data());
    }
    const double denom = static_cast<double>(m) * m;
    est.ksd2 = (2.0 * total + diag) / denom;
    est.pairs_used = static_cast<long>(m) * (m - 1) / 2 + m;
    if (options.with_grads) {
      est.grad.resize(n_par);
      for (int t = 0; t < n_par; ++t)
        est.grad[t] = (2.0 * grad_total[t] + diag_grad[t]) / denom;
    }
  }

  if (!std::isfinite(est.ksd2))
    throw numeric_error("KSD estimate is non-finite");
  if (options.with_grads && !est.grad.allFinite())
    throw numeric_error("KSD parameter gradient is non-finite");

  if (options.with_grads && options.param_space == ParamSpace::Linear) {
    // d/dh = (1/h) d/d(log h)
    for (int t = 0; t < n_par; ++t) est.grad[t] /= h[spec.family == KernelFamily::Product ? t : 0];
  }
  return est;
}

KernelSpec ksd_ascent_step(const KernelSpec& spec, const Ensemble& ens,
                           const ScoreCache& cache, double step,
                           const KsdOptions& options, Rng* rng,
                           SteinEstimate* estimate_out) {
  if (!(step >= 0.0) || !std::isfinite(step))
    throw parameter_error("ascent step size must be finite and non-negative");
  if (step == 0.0) {
    if (estimate_out) *estimate_out = SteinEstimate{};
    return spec;
  }
  KsdOptions opt = options;
  opt.with_grads = true;
  const SteinEstimate est = ksd_squared(spec, ens, cache, opt, rng);
  KernelSpec next = spec;
  if (options.param_space == ParamSpace::Log) {
    next.log_bandwidths += step * est.grad;
  } else {
    for (int t = 0; t < spec.param_count(); ++t) {
      const double h_new =
          std::max(std::exp(spec.log_bandwidths[t]) + step * est.grad[t], kMinLinearBandwidth);
      next.log_bandwidths[t] = std::log(h_new);
    }
  }
  if (!next.log_bandwidths.allFinite())
    throw numeric_error("kernel parameters became non-finite during ascent");
  if (estimate_out) *estimate_out = est;
  return next;
}

}  // namespace steinflow

#include "steinflow/dynamics.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "steinflow/common.hpp"

namespace steinflow {

namespace {

// Transport contribution of source particle t to target a:
// out += k(x_a, x_t) * (score_t + g), g the kernel slope in the second slot.
template <int P, bool Product>
void pair_transport(const double* xa, const double* xt, const double* st,
                    const double* inv_h, int d, double* out) {
  double qsum = 0.0;
  for (int i = 0; i < d; ++i) {
    const double ih = Product ? inv_h[i] : inv_h[0];
    const double diff = xa[i] - xt[i];
    qsum += (P == 1 ? std::abs(diff) : diff * diff) * ih;
  }
  // k underflows to exactly 0 past 745; bail before 1/h factors can turn a
  // degenerate bandwidth into inf * 0 (also catches qsum = inf/nan)
  if (!(qsum < 745.0)) return;
  const double k = std::exp(-qsum);
  for (int i = 0; i < d; ++i) {
    const double ih = Product ? inv_h[i] : inv_h[0];
    const double diff = xa[i] - xt[i];
    const double g = P == 1 ? ((diff > 0.0) - (diff < 0.0)) * ih : 2.0 * diff * ih;
    out[i] += k * (st[i] + g);
  }
}

using TransportFn = void (*)(const double*, const double*, const double*, const double*,
                             int, double*);

TransportFn select_transport_fn(int p, KernelFamily family) {
  if (p == 1)
    return family == KernelFamily::Product ? &pair_transport<1, true>
                                           : &pair_transport<1, false>;
  return family == KernelFamily::Product ? &pair_transport<2, true>
                                         : &pair_transport<2, false>;
}

// Mean transport direction per particle, rows in original storage order.
Eigen::MatrixXd transport_direction(const Ensemble& ens, const KernelSpec& spec,
                                    const ScoreCache& cache) {
  const int m = ens.count();
  const int d = ens.dim();
  const std::vector<int> order = canonical_order(ens);

  std::vector<double> x(static_cast<size_t>(m) * d), s(static_cast<size_t>(m) * d);
  for (int rank = 0; rank < m; ++rank) {
    for (int c = 0; c < d; ++c) {
      x[static_cast<size_t>(rank) * d + c] = ens.particles(order[rank], c);
      s[static_cast<size_t>(rank) * d + c] = cache.scores(order[rank], c);
    }
  }

  const Eigen::VectorXd h = spec.bandwidths(d);
  std::vector<double> inv_h(spec.family == KernelFamily::Product ? d : 1);
  for (size_t i = 0; i < inv_h.size(); ++i) inv_h[i] = 1.0 / h[static_cast<int>(i)];
  const TransportFn pair = select_transport_fn(spec.p, spec.family);

  Eigen::MatrixXd dir(m, d);
  std::vector<double> acc(d);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (int a = 0; a < m; ++a) {
    const double* xa = x.data() + static_cast<size_t>(a) * d;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int t = 0; t < m; ++t) {
      pair(xa, x.data() + static_cast<size_t>(t) * d, s.data() + static_cast<size_t>(t) * d,
           inv_h.data(), d, acc.data());
    }
    for (int c = 0; c < d; ++c) dir(order[a], c) = acc[c] * inv_m;
  }
  return dir;
}

void apply_schedule(StepSchedule& schedule, const Eigen::MatrixXd& dir,
                    Eigen::MatrixXd& particles) {
  if (schedule.kind == ScheduleKind::Fixed) {
    particles += schedule.gamma * dir;
    return;
  }
  const Eigen::MatrixXd dir_sq = dir.cwiseProduct(dir);
  if (!schedule.initialized) {
    schedule.accumulator = dir_sq;
    schedule.initialized = true;
  } else {
    if (schedule.accumulator.rows() != dir.rows() || schedule.accumulator.cols() != dir.cols())
      throw parameter_error("step-size accumulator shape does not match the ensemble");
    schedule.accumulator = schedule.alpha * schedule.accumulator +
                           (1.0 - schedule.alpha) * dir_sq;
  }
  particles.array() += schedule.gamma * dir.array() /
                       (schedule.fudge + schedule.accumulator.array().sqrt());
}

void check_schedule(const StepSchedule& s) {
  if (!std::isfinite(s.gamma) || s.gamma < 0.0)
    throw parameter_error("step size gamma must be finite and non-negative");
  if (s.kind == ScheduleKind::AdaGrad) {
    if (!(s.alpha >= 0.0 && s.alpha <= 1.0))
      throw parameter_error("accumulator decay alpha must lie in [0, 1]");
    if (!(s.fudge > 0.0)) throw parameter_error("schedule fudge factor must be positive");
  }
}

}  // namespace

NamedMetric NamedMetric::scalar(std::string name,
                                std::function<double(const Ensemble&)> f) {
  NamedMetric m;
  m.columns = {std::move(name)};
  m.fn = [fn = std::move(f)](const Ensemble& ens) {
    Eigen::VectorXd v(1);
    v[0] = fn(ens);
    return v;
  };
  return m;
}

StepSchedule StepSchedule::fixed(double gamma) {
  StepSchedule s;
  s.kind = ScheduleKind::Fixed;
  s.gamma = gamma;
  check_schedule(s);
  return s;
}

StepSchedule StepSchedule::adagrad(double gamma, double alpha, double fudge) {
  StepSchedule s;
  s.kind = ScheduleKind::AdaGrad;
  s.gamma = gamma;
  s.alpha = alpha;
  s.fudge = fudge;
  check_schedule(s);
  return s;
}

Ensemble svgd_step(const Ensemble& ens, const KernelSpec& spec, const ScoreCache& cache,
                   StepSchedule& schedule) {
  spec.check(ens.dim());
  check_schedule(schedule);
  if (cache.scores.rows() != ens.count() || cache.scores.cols() != ens.dim())
    throw parameter_error("score cache shape does not match the ensemble");
  const Eigen::MatrixXd dir = transport_direction(ens, spec, cache);
  Ensemble next = ens;
  apply_schedule(schedule, dir, next.particles);
  next.check_finite();
  return next;
}

Ensemble svgd_step(const Ensemble& ens, const KernelSpec& spec, const ScoreModel& model,
                   StepSchedule& schedule) {
  return svgd_step(ens, spec, ScoreCache::build(model, ens), schedule);
}

RunRecord run_svgd(Ensemble ens, KernelSpec spec, const ScoreModel& model,
                   const MethodConfig& method, StepSchedule schedule,
                   const RunOptions& options, Rng& rng,
                   const std::vector<NamedMetric>& metrics) {
  const auto t0 = std::chrono::steady_clock::now();
  spec.check(ens.dim());
  check_schedule(schedule);
  if (options.nsteps < 0) throw parameter_error("nsteps must be non-negative");
  if (options.log_every < 1) throw parameter_error("log_every must be at least 1");
  if (method.nstepstheta < 1) throw parameter_error("nstepstheta must be at least 1");
  if (method.paramupdate_every < 1)
    throw parameter_error("paramupdate_every must be at least 1");
  if (method.median_refresh_every < 1)
    throw parameter_error("median_refresh_every must be at least 1");
  if (method.method == MethodKind::MedianHeuristic &&
      spec.family != KernelFamily::Isotropic)
    throw parameter_error("the median method drives a single shared bandwidth");
  if (method.method == MethodKind::Adaptive && method.s < 0.0)
    throw parameter_error("ascent step size must be non-negative");

  RunRecord rec;
  rec.final_kernel = spec;
  rec.columns.push_back("ksd2");
  const int n_par = spec.param_count();
  if (n_par == 1) {
    rec.columns.push_back("h");
  } else {
    for (int t = 0; t < n_par; ++t) rec.columns.push_back("h_" + std::to_string(t + 1));
  }
  for (const NamedMetric& metric : metrics)
    for (const std::string& col : metric.columns) rec.columns.push_back(col);

  KsdOptions ksd_opt;
  ksd_opt.variant = method.variant;
  ksd_opt.param_space = method.param_space;
  ksd_opt.subsample = method.ksd_subsample;

  auto log_state = [&](long iter) {
    KsdOptions log_opt = ksd_opt;
    log_opt.subsample = 0;  // log the full-ensemble estimate
    log_opt.with_grads = false;
    const ScoreCache cache = ScoreCache::build(model, ens);
    rec.score_evaluations += ens.count();
    const SteinEstimate est = ksd_squared(spec, ens, cache, log_opt);
    std::vector<double> row;
    row.reserve(rec.columns.size());
    row.push_back(est.ksd2);
    for (int t = 0; t < n_par; ++t) row.push_back(std::exp(spec.log_bandwidths[t]));
    for (const NamedMetric& metric : metrics) {
      const Eigen::VectorXd vals = metric.fn(ens);
      if (vals.size() != static_cast<Eigen::Index>(metric.columns.size()))
        throw parameter_error("metric returned a value count different from its columns");
      for (Eigen::Index i = 0; i < vals.size(); ++i) row.push_back(vals[i]);
    }
    rec.logged_iterations.push_back(iter);
    rec.rows.push_back(std::move(row));
  };

  try {
    log_state(0);
  } catch (const numeric_error& e) {
    throw run_error(e.what(), 0);
  }
  for (long n = 1; n <= options.nsteps; ++n) {
    try {
      const ScoreCache cache = ScoreCache::build(model, ens);
      rec.score_evaluations += ens.count();
      if (method.method == MethodKind::Adaptive &&
          (n - 1) % method.paramupdate_every == 0) {
        for (int t = 0; t < method.nstepstheta; ++t)
          spec = ksd_ascent_step(spec, ens, cache, method.s, ksd_opt, &rng);
      } else if (method.method == MethodKind::MedianHeuristic &&
                 (n - 1) % method.median_refresh_every == 0) {
        const double h = median_heuristic(ens, spec.p, method.median_norm);
        spec.log_bandwidths[0] = std::log(h);
      }
      ens = svgd_step(ens, spec, cache, schedule);
      if (n % options.log_every == 0 || n == options.nsteps) log_state(n);
    } catch (const run_error&) {
      throw;
    } catch (const numeric_error& e) {
      throw run_error(e.what(), n);
    }
  }

  rec.iterations = options.nsteps;
  rec.final_ensemble = std::move(ens);
  rec.final_kernel = spec;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace steinflow

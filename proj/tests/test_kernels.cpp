#include <doctest.h>

#include <cmath>

#include "steinflow/common.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/rng.hpp"

using namespace steinflow;

namespace {

KernelSpec random_spec(Rng& rng, int p, KernelFamily family, int d) {
  if (family == KernelFamily::Isotropic)
    return KernelSpec::isotropic(p, 0.3 + 3.0 * rng.uniform01());
  Eigen::VectorXd h(d);
  for (int i = 0; i < d; ++i) h[i] = 0.3 + 3.0 * rng.uniform01();
  return KernelSpec::product(p, h);
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("kernels: analytic value for the squared-exponential case") {
  const KernelSpec spec = KernelSpec::isotropic(2, 2.0);
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 0.0;
  y << 0.0, 2.0;
  const KernelEval ev = kernel_eval(spec, x, y);
  CHECK(ev.value == doctest::Approx(std::exp(-5.0 / 2.0)).epsilon(1e-14));
}

TEST_CASE("kernels: product with equal bandwidths equals isotropic") {
  Rng rng(101);
  for (int p : {1, 2}) {
    for (int d : {1, 3, 6}) {
      const double h = 0.5 + 2.0 * rng.uniform01();
      const KernelSpec iso = KernelSpec::isotropic(p, h);
      const KernelSpec prod = KernelSpec::product(p, Eigen::VectorXd::Constant(d, h));
      Eigen::VectorXd x(d), y(d);
      for (int i = 0; i < d; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
      }
      const KernelEval a = kernel_eval(iso, x, y, true);
      const KernelEval b = kernel_eval(prod, x, y, true);
      CHECK(std::abs(a.value - b.value) <= 1e-12);
      CHECK((a.grad_x - b.grad_x).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((a.grad_y - b.grad_y).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(a.trace_xy - b.trace_xy) <= 1e-12);
      // the shared log-bandwidth derivative is the sum over per-dimension ones
      CHECK(std::abs(a.d_value[0] - b.d_value.sum()) <= 1e-12);
      CHECK(std::abs(a.d_trace[0] - b.d_trace.sum()) <= 1e-12);
      for (int i = 0; i < d; ++i)
        CHECK(std::abs(a.d_grad_x(0, i) - b.d_grad_x.col(i).sum()) <= 1e-12);
    }
  }
}

TEST_CASE("kernels: gradients match central finite differences") {
  Rng rng(103);
  const double eps = 1e-6;
  int probes = 0;
  for (int p : {1, 2}) {
    for (auto family : {KernelFamily::Isotropic, KernelFamily::Product}) {
      for (int d : {1, 3, 7}) {
        for (int rep = 0; rep < 10; ++rep) {
          const KernelSpec spec = random_spec(rng, p, family, d);
          Eigen::VectorXd x(d), y(d);
          for (int i = 0; i < d; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
          }
          const KernelEval ev = kernel_eval(spec, x, y, true);

          for (int i = 0; i < d; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            const double fd =
                (kernel_eval(spec, xp, y).value - kernel_eval(spec, xm, y).value) /
                (2 * eps);
            CHECK(rel_err(ev.grad_x[i], fd) < 1e-5);

            Eigen::VectorXd yp = y, ym = y;
            yp[i] += eps;
            ym[i] -= eps;
            const double fdy =
                (kernel_eval(spec, x, yp).value - kernel_eval(spec, x, ym).value) /
                (2 * eps);
            CHECK(rel_err(ev.grad_y[i], fdy) < 1e-5);
          }

          // trace of the mixed second derivative via FD of grad_y in x
          double tr = 0.0;
          for (int i = 0; i < d; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            tr += (kernel_eval(spec, xp, y).grad_y[i] -
                   kernel_eval(spec, xm, y).grad_y[i]) /
                  (2 * eps);
          }
          CHECK(rel_err(ev.trace_xy, tr) < 1e-4);

          // parameter derivatives (log-bandwidths)
          for (int m = 0; m < spec.param_count(); ++m) {
            KernelSpec sp = spec, sm = spec;
            sp.log_bandwidths[m] += eps;
            sm.log_bandwidths[m] -= eps;
            const KernelEval evp = kernel_eval(sp, x, y);
            const KernelEval evm = kernel_eval(sm, x, y);
            CHECK(rel_err(ev.d_value[m], (evp.value - evm.value) / (2 * eps)) < 1e-5);
            CHECK(rel_err(ev.d_trace[m], (evp.trace_xy - evm.trace_xy) / (2 * eps)) < 1e-4);
            for (int i = 0; i < d; ++i) {
              CHECK(rel_err(ev.d_grad_x(m, i), (evp.grad_x[i] - evm.grad_x[i]) / (2 * eps)) <
                    1e-4);
              CHECK(rel_err(ev.d_grad_y(m, i), (evp.grad_y[i] - evm.grad_y[i]) / (2 * eps)) <
                    1e-4);
            }
          }
          ++probes;
        }
      }
    }
  }
  CHECK(probes == 120);
}

TEST_CASE("kernels: p=1 ties use the zero-slope convention") {
  const KernelSpec spec = KernelSpec::product(1, Eigen::VectorXd::Constant(2, 1.5));
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 0.7;
  y << -0.5, 0.7;  // tie in coordinate 1
  const KernelEval ev = kernel_eval(spec, x, y, true);
  CHECK(ev.grad_x[1] == 0.0);
  CHECK(ev.grad_y[1] == 0.0);
  CHECK(ev.value == doctest::Approx(std::exp(-1.5 / 1.5)).epsilon(1e-14));
  // identical points: value 1, all slopes zero
  const KernelEval self = kernel_eval(spec, x, x, true);
  CHECK(self.value == 1.0);
  CHECK(self.grad_x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(self.trace_xy == 0.0);
}

TEST_CASE("kernels: spec validation") {
  CHECK_THROWS_AS(KernelSpec::isotropic(3, 1.0), parameter_error);
  CHECK_THROWS_AS(KernelSpec::isotropic(2, 0.0), parameter_error);
  CHECK_THROWS_AS(KernelSpec::isotropic(2, -1.0), parameter_error);
  CHECK_THROWS_AS(KernelSpec::product(2, Eigen::VectorXd()), parameter_error);
  const KernelSpec spec = KernelSpec::product(2, Eigen::VectorXd::Ones(3));
  Eigen::VectorXd x2(2), y2(2);
  x2.setZero();
  y2.setZero();
  CHECK_THROWS_AS(kernel_eval(spec, x2, y2), parameter_error);  // dim mismatch
}

TEST_CASE("kernels: median heuristic on {0,1,2}") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  const Ensemble ens(pts);
  for (int p : {1, 2}) {
    const double h = median_heuristic(ens, p);
    CHECK(std::abs(h - 1.0 / std::log(2.0)) < 1e-12);
  }
}

TEST_CASE("kernels: median heuristic edge cases") {
  Eigen::MatrixXd two(2, 1);
  two << 0.0, 1.0;
  CHECK_THROWS_AS(median_heuristic(Ensemble(two), 2), parameter_error);
  Eigen::MatrixXd same = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(median_heuristic(Ensemble(same), 2), numeric_error);

  // lower median: 4 points on a line give distances {1,1,1,2,2,3}; lower
  // median is the 3rd smallest = 1
  Eigen::MatrixXd line(4, 1);
  line << 0.0, 1.0, 2.0, 3.0;
  const double h = median_heuristic(Ensemble(line), 2);
  CHECK(std::abs(h - 1.0 / std::log(3.0)) < 1e-12);
}

TEST_CASE("kernels: median norm choice matters only in more than one dimension") {
  Rng rng(107);
  Eigen::MatrixXd pts(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  const Ensemble ens(pts);
  const double he = median_heuristic(ens, 1, MedianNorm::Euclidean);
  const double hp = median_heuristic(ens, 1, MedianNorm::PNorm);
  CHECK(he != hp);  // l1 vs l2 distances differ off-axis
}

TEST_CASE("kernels: transport summand composes value and slope") {
  Rng rng(109);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 3;
    const KernelSpec spec = random_spec(rng, rep % 2 ? 1 : 2, KernelFamily::Product, d);
    Eigen::VectorXd xi(d), xj(d), sj(d);
    for (int i = 0; i < d; ++i) {
      xi[i] = rng.normal();
      xj[i] = rng.normal();
      sj[i] = rng.normal();
    }
    const Eigen::VectorXd got = svgd_direction_terms(spec, xi, xj, sj);
    const KernelEval ev = kernel_eval(spec, xi, xj);
    const Eigen::VectorXd want = ev.value * sj + ev.grad_y;
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);
  }
}

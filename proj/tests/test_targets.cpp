#include <doctest.h>

#include <cmath>

#include "steinflow/common.hpp"
#include "steinflow/targets.hpp"

using namespace steinflow;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("targets: mixture construction normalizes and validates") {
  Eigen::VectorXd w(2), mu(2), var(2);
  w << 2.0, 4.0;
  mu << -1.0, 1.0;
  var << 1.0, 2.0;
  const GaussianMixture gm = GaussianMixture::make(w, mu, var);
  CHECK(gm.weights[0] == doctest::Approx(1.0 / 3.0));
  CHECK(gm.weights[1] == doctest::Approx(2.0 / 3.0));

  Eigen::VectorXd bad = w;
  bad[0] = -1.0;
  CHECK_THROWS_AS(GaussianMixture::make(bad, mu, var), parameter_error);
  Eigen::VectorXd zero_var = var;
  zero_var[1] = 0.0;
  CHECK_THROWS_AS(GaussianMixture::make(w, mu, zero_var), parameter_error);
  CHECK_THROWS_AS(GaussianMixture::make(w, mu.head(1), var), parameter_error);
  CHECK_THROWS_AS(GaussianMixture::make(Eigen::VectorXd(), Eigen::VectorXd(),
                                        Eigen::VectorXd()),
                  parameter_error);
}

TEST_CASE("targets: two-mode benchmark score has closed-form values") {
  const GaussianMixture gm = mixture1d();
  CHECK(gm.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(gm.means[0] == -2.0);
  CHECK(gm.means[1] == 2.0);

  // At x = 0 both components are two sigma away, so the responsibilities equal
  // the weights: score = (1/3)(-2) + (2/3)(2) = 2/3.
  CHECK(mixture_score(gm, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // Far in a tail the nearest component owns the point.
  CHECK(mixture_score(gm, 12.0) == doctest::Approx(-(12.0 - 2.0)).epsilon(1e-9));
  CHECK(mixture_score(gm, -12.0) == doctest::Approx(-(-12.0 + 2.0)).epsilon(1e-9));

  // A symmetric equal-weight mixture balances at the midpoint.
  Eigen::VectorXd w(2), mu(2), var(2);
  w << 1.0, 1.0;
  mu << -3.0, 3.0;
  var << 1.0, 1.0;
  CHECK(mixture_score(GaussianMixture::make(w, mu, var), 0.0) == 0.0);
}

TEST_CASE("targets: mixture score differentiates the log density") {
  const GaussianMixture gm = mixture1d();
  const double eps = 1e-6;
  for (double x : {-4.0, -2.0, -0.5, 0.0, 0.3, 1.0, 2.0, 5.0}) {
    const double fd =
        (mixture_log_density(gm, x + eps) - mixture_log_density(gm, x - eps)) / (2 * eps);
    CHECK(mixture_score(gm, x) == doctest::Approx(fd).epsilon(1e-6));
  }
  // direct-formula density check without log-sum-exp
  const double x = -2.0;
  const double direct = std::log((1.0 / 3.0) * std::exp(0.0) / std::sqrt(2 * kPi) +
                                 (2.0 / 3.0) * std::exp(-8.0) / std::sqrt(2 * kPi));
  CHECK(mixture_log_density(gm, x) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("targets: mixture sampler reproduces weights and moments") {
  const GaussianMixture gm = mixture1d();
  Rng rng(404);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  int right = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_mixture(gm, rng);
    sum += x;
    sumsq += x * x;
    if (x > 0.0) ++right;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(2.0 / 3.0).epsilon(0.03));
  CHECK(sumsq / n - mean * mean == doctest::Approx(5.0 - 4.0 / 9.0).epsilon(0.02));
  // P(x > 0) ~ (2/3) P(N(2,1) > 0) + (1/3) P(N(-2,1) > 0) ~ 0.659
  CHECK(static_cast<double>(right) / n == doctest::Approx(0.659).epsilon(0.02));

  Rng r1(5), r2(5);
  const Ensemble a = sample_mixture(gm, r1, 50);
  const Ensemble b = sample_mixture(gm, r2, 50);
  CHECK(a.particles == b.particles);
  CHECK(a.dim() == 1);
}

TEST_CASE("targets: diagonal gaussian has 1/i^2 marginal variances") {
  const ScoreModel model = diag_gaussian_target(8);
  CHECK(model.dim == 8);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(8);
  const Eigen::VectorXd s = model.score(x);
  for (int i = 0; i < 8; ++i)
    CHECK(s[i] == doctest::Approx(-std::pow(i + 1.0, 2)).epsilon(1e-14));

  REQUIRE(model.gaussian_info.has_value());
  CHECK(model.gaussian_info->mean.norm() == 0.0);
  for (int i = 0; i < 8; ++i)
    CHECK(model.gaussian_info->cov(i, i) ==
          doctest::Approx(1.0 / ((i + 1.0) * (i + 1.0))).epsilon(1e-14));
  CHECK(model.gaussian_info->cov(0, 1) == 0.0);

  Rng rng(409);
  const Ensemble draw = sample_diag_gaussian(rng, 100000, 3);
  for (int i = 0; i < 3; ++i) {
    const auto col = draw.particles.col(i);
    const double m = col.mean();
    const double v = (col.array() - m).square().sum() / (col.size() - 1);
    CHECK(m == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
    CHECK(v == doctest::Approx(1.0 / ((i + 1.0) * (i + 1.0))).epsilon(0.03));
  }
  CHECK_THROWS_AS(diag_gaussian_target(0), parameter_error);
}

TEST_CASE("targets: scalar conjugate posterior matches the textbook answer") {
  LinearGaussianInverse prob;
  prob.forward = Eigen::MatrixXd::Ones(1, 1);
  prob.data = Eigen::VectorXd::Constant(1, 3.0);
  prob.noise_var = Eigen::VectorXd::Ones(1);
  prob.prior_var = Eigen::VectorXd::Ones(1);
  const GaussianInfo post = exact_posterior(prob);
  CHECK(post.mean[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(post.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("targets: posterior moments agree with a dense-inverse oracle") {
  Rng rng(419);
  const int n = 6, d = 4;
  LinearGaussianInverse prob;
  prob.forward.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) prob.forward(i, j) = rng.normal();
  prob.data.resize(n);
  for (int i = 0; i < n; ++i) prob.data[i] = rng.normal();
  prob.noise_var = Eigen::VectorXd::Constant(n, 0.3);
  prob.prior_var.resize(d);
  for (int j = 0; j < d; ++j) prob.prior_var[j] = 0.5 + rng.uniform01();

  const GaussianInfo post = exact_posterior(prob);
  const Eigen::MatrixXd precision =
      prob.forward.transpose() * prob.noise_var.cwiseInverse().asDiagonal() * prob.forward +
      Eigen::MatrixXd(prob.prior_var.cwiseInverse().asDiagonal());
  const Eigen::MatrixXd cov_oracle =
      Eigen::FullPivLU<Eigen::MatrixXd>(precision).inverse();
  const Eigen::VectorXd mean_oracle =
      cov_oracle * prob.forward.transpose() * prob.data.cwiseQuotient(prob.noise_var);
  CHECK((post.cov - cov_oracle).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((post.mean - mean_oracle).cwiseAbs().maxCoeff() < 1e-10);

  // the score vanishes at the posterior mean and differentiates the log density
  CHECK(linear_gaussian_score(prob, post.mean).norm() < 1e-8);
  const double eps = 1e-6;
  for (int probe = 0; probe < 10; ++probe) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    const Eigen::VectorXd s = linear_gaussian_score(prob, x);
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += eps;
      xm[j] -= eps;
      const double fd = (linear_gaussian_log_density(prob, xp) -
                         linear_gaussian_log_density(prob, xm)) /
                        (2 * eps);
      CHECK(s[j] == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  const ScoreModel model = linear_gaussian_target(prob);
  CHECK(model.dim == d);
  Eigen::VectorXd probe = Eigen::VectorXd::Constant(d, 0.7);
  CHECK((model.score(probe) - linear_gaussian_score(prob, probe)).norm() < 1e-10);
  REQUIRE(model.gaussian_info.has_value());
  CHECK((model.gaussian_info->mean - post.mean).norm() < 1e-12);
}

TEST_CASE("targets: zero forward map gives back the prior") {
  LinearGaussianInverse prob;
  prob.forward = Eigen::MatrixXd::Zero(3, 2);
  prob.data = Eigen::VectorXd::Zero(3);
  prob.noise_var = Eigen::VectorXd::Ones(3);
  prob.prior_var.resize(2);
  prob.prior_var << 2.0, 0.25;
  const GaussianInfo post = exact_posterior(prob);
  CHECK(post.mean.norm() == 0.0);
  CHECK(post.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(post.cov(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(post.cov(0, 1)) < 1e-15);

  Rng rng(421);
  const Ensemble draw = sample_prior(prob, rng, 60000);
  for (int j = 0; j < 2; ++j) {
    const auto col = draw.particles.col(j);
    const double m = col.mean();
    const double v = (col.array() - m).square().sum() / (col.size() - 1);
    CHECK(v == doctest::Approx(prob.prior_var[j]).epsilon(0.03));
  }
}

TEST_CASE("targets: inverse-problem inputs are validated") {
  LinearGaussianInverse prob;
  prob.forward = Eigen::MatrixXd::Ones(2, 2);
  prob.data = Eigen::VectorXd::Ones(2);
  prob.noise_var = Eigen::VectorXd::Ones(2);
  prob.prior_var = Eigen::VectorXd::Ones(2);
  CHECK_NOTHROW(prob.check());

  LinearGaussianInverse bad = prob;
  bad.data = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(bad.check(), parameter_error);
  bad = prob;
  bad.noise_var[1] = 0.0;
  CHECK_THROWS_AS(bad.check(), parameter_error);
  bad = prob;
  bad.prior_var[0] = -1.0;
  CHECK_THROWS_AS(bad.check(), parameter_error);
  CHECK_THROWS_AS(linear_gaussian_score(prob, Eigen::VectorXd::Ones(3)), parameter_error);
}

TEST_CASE("targets: ode forward solve matches the discrete spectral formula") {
  // The sine modes are exact eigenvectors of the second-difference operator,
  // so the solved column k must equal sqrt(2) sin(pi k s) divided by
  // (4/delta^2) sin^2(pi k delta / 2) + 1 at every observation point.
  OdeProblemSpec spec;
  spec.r = 6;
  spec.n_obs = 16;
  spec.n_x = 4;
  const Eigen::MatrixXd f = ode_forward_matrix(spec);
  REQUIRE(f.rows() == 16);
  REQUIRE(f.cols() == 4);
  const double delta = 1.0 / 64.0;
  for (int k = 1; k <= 4; ++k) {
    const double sine = std::sin(kPi * k * delta / 2.0);
    const double lambda = 4.0 / (delta * delta) * sine * sine + 1.0;
    for (int j = 1; j <= 16; ++j) {
      const double s = static_cast<double>(j) / 16.0;
      const double want = j == 16 ? 0.0 : std::sqrt(2.0) * std::sin(kPi * k * s) / lambda;
      CHECK(f(j - 1, k - 1) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("targets: ode discretization converges at second order") {
  // continuum solution of -f'' + f = sqrt(2) sin(pi k s) is the same sine over
  // (pi k)^2 + 1
  auto max_error = [](int r) {
    OdeProblemSpec spec;
    spec.r = r;
    spec.n_obs = 8;
    spec.n_x = 3;
    const Eigen::MatrixXd f = ode_forward_matrix(spec);
    double err = 0.0;
    for (int k = 1; k <= 3; ++k)
      for (int j = 1; j < 8; ++j) {
        const double s = static_cast<double>(j) / 8.0;
        const double want = std::sqrt(2.0) * std::sin(kPi * k * s) / (kPi * kPi * k * k + 1.0);
        err = std::max(err, std::abs(f(j - 1, k - 1) - want));
      }
    return err;
  };
  const double e4 = max_error(4);
  const double e7 = max_error(7);
  const double order = std::log2(e4 / e7) / 3.0;
  CHECK(order > 1.9);
  CHECK(order < 2.1);

  // the default-resolution matrix is within a few squared mesh widths
  OdeProblemSpec fine;
  const Eigen::MatrixXd f = ode_forward_matrix(fine);
  REQUIRE(f.rows() == 256);
  REQUIRE(f.cols() == 16);
  const double mid = f(127, 0);  // s = 1/2, first mode
  const double want = std::sqrt(2.0) / (kPi * kPi + 1.0);
  CHECK(std::abs(mid - want) < 5.0 * std::pow(2.0, -16.0));
  for (int k = 0; k < 16; ++k) CHECK(f(255, k) == 0.0);  // boundary row
}

TEST_CASE("targets: ode problem assembly is seeded and self-consistent") {
  OdeProblemSpec spec;
  Rng r1(77), r2(77);
  const InverseProblem a = build_ode_problem(spec, r1);
  const InverseProblem b = build_ode_problem(spec, r2);
  CHECK(a.x_ref == b.x_ref);
  CHECK(a.inverse.data == b.inverse.data);

  CHECK(a.inverse.data == a.y_ref);
  CHECK((a.inverse.forward * a.x_ref - a.y_ref).norm() == 0.0);
  for (int k = 1; k <= 16; ++k)
    CHECK(a.inverse.prior_var[k - 1] == doctest::Approx(50.0 / (k * k)).epsilon(1e-14));
  CHECK(a.inverse.noise_var[0] == 1e-3);
  CHECK(a.inverse.noise_var.size() == 256);

  OdeProblemSpec bad;
  bad.n_obs = 3;  // 2^8 is not divisible by 3
  CHECK_THROWS_AS(ode_forward_matrix(bad), parameter_error);
  bad = OdeProblemSpec{};
  bad.n_obs = 1 << 9;
  CHECK_THROWS_AS(ode_forward_matrix(bad), parameter_error);
}

TEST_CASE("targets: gp design matrix is orthogonal with a zero last row") {
  GpProblemSpec spec;
  Rng rng(83);
  const InverseProblem prob = build_gp_problem(spec, rng);
  const Eigen::MatrixXd& a = prob.inverse.forward;
  REQUIRE(a.rows() == 64);
  REQUIRE(a.cols() == 16);
  CHECK(a(0, 0) == doctest::Approx(std::sqrt(2.0) * std::sin(kPi / 64.0)).epsilon(1e-14));
  for (int k = 0; k < 16; ++k) CHECK(std::abs(a(63, k)) < 1e-12);  // sin(k pi)

  const Eigen::MatrixXd gram = a.transpose() * a;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const double want = i == j ? 64.0 : 0.0;
      CHECK(gram(i, j) == doctest::Approx(want).scale(1.0).epsilon(1e-10));
    }
}

TEST_CASE("targets: gp posterior is diagonal with 1/(n_y + k^2) variances") {
  GpProblemSpec spec;
  Rng rng(89);
  const InverseProblem prob = build_gp_problem(spec, rng);
  const GaussianInfo post = exact_posterior(prob.inverse);
  double trace_want = 0.0;
  for (int k = 1; k <= 16; ++k) {
    const double v = 1.0 / (64.0 + k * k);
    trace_want += v;
    CHECK(post.cov(k - 1, k - 1) == doctest::Approx(v).epsilon(1e-10));
    // posterior mean shrinks the generating coefficients by n_y/(n_y + k^2)
    CHECK(post.mean[k - 1] ==
          doctest::Approx(64.0 * prob.x_ref[k - 1] / (64.0 + k * k)).epsilon(1e-8));
  }
  CHECK(post.cov.trace() == doctest::Approx(trace_want).epsilon(1e-12));

  GpProblemSpec small;
  small.n_x = 4;
  small.n_y = 64;
  Rng rng2(89);
  const GaussianInfo post2 = exact_posterior(build_gp_problem(small, rng2).inverse);
  double t2 = 0.0;
  for (int k = 1; k <= 4; ++k) t2 += 1.0 / (64.0 + k * k);
  CHECK(post2.cov.trace() == doctest::Approx(t2).epsilon(1e-12));
}

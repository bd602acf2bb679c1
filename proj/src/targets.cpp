#include "steinflow/targets.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "steinflow/common.hpp"

namespace steinflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLogTwoPi = 1.8378770664093454836;
}  // namespace

GaussianMixture GaussianMixture::make(const Eigen::VectorXd& weights,
                                      const Eigen::VectorXd& means,
                                      const Eigen::VectorXd& variances) {
  const Eigen::Index k = weights.size();
  if (k == 0) throw parameter_error("mixture needs at least one component");
  if (means.size() != k || variances.size() != k)
    throw parameter_error("mixture component lists must have equal length");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw parameter_error("mixture weights must be positive and finite");
    if (!(variances[i] > 0.0) || !std::isfinite(variances[i]))
      throw parameter_error("mixture variances must be positive and finite");
    if (!std::isfinite(means[i])) throw parameter_error("mixture means must be finite");
  }
  GaussianMixture gm;
  gm.weights = weights / weights.sum();
  gm.means = means;
  gm.variances = variances;
  return gm;
}

double mixture_log_density(const GaussianMixture& gm, double x) {
  // log-sum-exp over component log densities
  const Eigen::Index k = gm.weights.size();
  Eigen::VectorXd le(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double z = x - gm.means[i];
    le[i] = std::log(gm.weights[i]) - 0.5 * (kLogTwoPi + std::log(gm.variances[i])) -
            0.5 * z * z / gm.variances[i];
  }
  const double top = le.maxCoeff();
  return top + std::log((le.array() - top).exp().sum());
}

double mixture_score(const GaussianMixture& gm, double x) {
  if (!std::isfinite(x)) throw parameter_error("mixture score needs a finite point");
  const Eigen::Index k = gm.weights.size();
  Eigen::VectorXd le(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double z = x - gm.means[i];
    le[i] = std::log(gm.weights[i]) - 0.5 * std::log(gm.variances[i]) -
            0.5 * z * z / gm.variances[i];
  }
  const double top = le.maxCoeff();
  const Eigen::VectorXd r = (le.array() - top).exp();
  double num = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    num += r[i] * (-(x - gm.means[i]) / gm.variances[i]);
  return num / r.sum();
}

double sample_mixture(const GaussianMixture& gm, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  Eigen::Index pick = gm.weights.size() - 1;
  for (Eigen::Index i = 0; i < gm.weights.size(); ++i) {
    acc += gm.weights[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return gm.means[pick] + std::sqrt(gm.variances[pick]) * rng.normal();
}

Ensemble sample_mixture(const GaussianMixture& gm, Rng& rng, int m) {
  if (m < 1) throw parameter_error("sample size must be at least 1");
  Eigen::MatrixXd x(m, 1);
  for (int i = 0; i < m; ++i) x(i, 0) = sample_mixture(gm, rng);
  return Ensemble(x);
}

GaussianMixture mixture1d() {
  Eigen::VectorXd w(2), mu(2), var(2);
  w << 1.0 / 3.0, 2.0 / 3.0;
  mu << -2.0, 2.0;
  var << 1.0, 1.0;
  return GaussianMixture::make(w, mu, var);
}

ScoreModel mixture_target(const GaussianMixture& gm) {
  ScoreModel model;
  model.dim = 1;
  model.description = "1d Gaussian mixture";
  model.score = [gm](const Eigen::VectorXd& x) {
    Eigen::VectorXd s(1);
    s[0] = mixture_score(gm, x[0]);
    return s;
  };
  return model;
}

ScoreModel diag_gaussian_target(int d) {
  if (d < 1) throw parameter_error("dimension must be at least 1");
  Eigen::VectorXd inv_var(d);
  for (int i = 0; i < d; ++i) {
    const double sd = 1.0 / (i + 1.0);
    inv_var[i] = 1.0 / (sd * sd);
  }
  ScoreModel model;
  model.dim = d;
  model.description = "Gaussian, marginal variance 1/i^2";
  model.score = [inv_var](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-inv_var.cwiseProduct(x));
  };
  GaussianInfo info;
  info.mean = Eigen::VectorXd::Zero(d);
  info.cov = inv_var.cwiseInverse().asDiagonal();
  model.gaussian_info = info;
  return model;
}

Ensemble sample_diag_gaussian(Rng& rng, int m, int d) {
  Eigen::VectorXd sd(d);
  for (int i = 0; i < d; ++i) sd[i] = 1.0 / (i + 1.0);
  return sample_gaussian(rng, m, Eigen::VectorXd::Zero(d), sd);
}

void LinearGaussianInverse::check() const {
  const Eigen::Index n_obs = forward.rows();
  const Eigen::Index n_x = forward.cols();
  if (n_obs < 1 || n_x < 1) throw parameter_error("forward matrix must be non-empty");
  if (data.size() != n_obs) throw parameter_error("data length must match forward rows");
  if (noise_var.size() != n_obs)
    throw parameter_error("noise variance length must match forward rows");
  if (prior_var.size() != n_x)
    throw parameter_error("prior variance length must match forward columns");
  for (Eigen::Index i = 0; i < n_obs; ++i)
    if (!(noise_var[i] > 0.0) || !std::isfinite(noise_var[i]))
      throw parameter_error("noise variances must be positive and finite");
  for (Eigen::Index i = 0; i < n_x; ++i)
    if (!(prior_var[i] > 0.0) || !std::isfinite(prior_var[i]))
      throw parameter_error("prior variances must be positive and finite");
  if (!forward.allFinite() || !data.allFinite())
    throw parameter_error("forward matrix and data must be finite");
}

Eigen::VectorXd linear_gaussian_score(const LinearGaussianInverse& prob,
                                      const Eigen::VectorXd& x) {
  if (x.size() != prob.forward.cols())
    throw parameter_error("point dimension must match forward columns");
  const Eigen::VectorXd resid = prob.data - prob.forward * x;
  return prob.forward.transpose() * resid.cwiseQuotient(prob.noise_var) -
         x.cwiseQuotient(prob.prior_var);
}

double linear_gaussian_log_density(const LinearGaussianInverse& prob,
                                   const Eigen::VectorXd& x) {
  const Eigen::VectorXd resid = prob.data - prob.forward * x;
  return -0.5 * resid.dot(resid.cwiseQuotient(prob.noise_var)) -
         0.5 * x.dot(x.cwiseQuotient(prob.prior_var));
}

GaussianInfo exact_posterior(const LinearGaussianInverse& prob) {
  prob.check();
  const Eigen::Index d = prob.forward.cols();
  Eigen::MatrixXd precision =
      prob.forward.transpose() * prob.noise_var.cwiseInverse().asDiagonal() * prob.forward;
  precision += Eigen::MatrixXd(prob.prior_var.cwiseInverse().asDiagonal());
  precision = 0.5 * (precision + precision.transpose()).eval();
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw numeric_error("posterior precision matrix is not positive definite");
  GaussianInfo info;
  info.cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
  info.cov = 0.5 * (info.cov + info.cov.transpose()).eval();
  const Eigen::VectorXd b =
      prob.forward.transpose() * prob.data.cwiseQuotient(prob.noise_var);
  info.mean = llt.solve(b);
  const double resid = (precision * info.mean - b).norm();
  if (!(resid <= 1e-8 * std::max(1.0, b.norm())))
    throw numeric_error("posterior normal equations did not solve to tolerance");
  return info;
}

ScoreModel linear_gaussian_target(const LinearGaussianInverse& prob) {
  prob.check();
  const Eigen::Index d = prob.forward.cols();
  // score(x) = b - P x with both pieces precomputed
  Eigen::MatrixXd precision =
      prob.forward.transpose() * prob.noise_var.cwiseInverse().asDiagonal() * prob.forward;
  precision += Eigen::MatrixXd(prob.prior_var.cwiseInverse().asDiagonal());
  precision = 0.5 * (precision + precision.transpose()).eval();
  const Eigen::VectorXd b =
      prob.forward.transpose() * prob.data.cwiseQuotient(prob.noise_var);

  ScoreModel model;
  model.dim = static_cast<int>(d);
  model.description = "linear-Gaussian posterior";
  model.score = [precision, b](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(b - precision * x);
  };
  model.gaussian_info = exact_posterior(prob);
  return model;
}

Ensemble sample_prior(const LinearGaussianInverse& prob, Rng& rng, int m) {
  return sample_gaussian(rng, m, Eigen::VectorXd::Zero(prob.forward.cols()),
                         prob.prior_var.cwiseSqrt());
}

Eigen::MatrixXd ode_forward_matrix(const OdeProblemSpec& spec) {
  if (spec.r < 1 || spec.r > 24) throw parameter_error("mesh exponent r must be in [1, 24]");
  const int n_grid = 1 << spec.r;  // mesh width 2^-r
  if (spec.n_obs < 1 || spec.n_obs > n_grid)
    throw parameter_error("n_obs must lie in [1, 2^r]");
  if (n_grid % spec.n_obs != 0)
    throw parameter_error("observation grid must divide the solver grid");
  if (spec.n_x < 1) throw parameter_error("n_x must be at least 1");
  if (!(spec.kl_scale > 0.0)) throw parameter_error("coefficient prior scale must be positive");
  if (!(spec.noise_var > 0.0)) throw parameter_error("noise variance must be positive");

  const int n_int = n_grid - 1;  // interior nodes
  const double delta = 1.0 / n_grid;
  const double diag_v = 2.0 / (delta * delta) + 1.0;
  const double off_v = -1.0 / (delta * delta);
  const Eigen::VectorXd diag = Eigen::VectorXd::Constant(n_int, diag_v);
  const Eigen::VectorXd off = Eigen::VectorXd::Constant(n_int - 1, off_v);

  const int stride = n_grid / spec.n_obs;  // observation j sits at node j*stride
  Eigen::MatrixXd f(spec.n_obs, spec.n_x);
  Eigen::VectorXd u(n_int);
  for (int k = 1; k <= spec.n_x; ++k) {
    for (int j = 1; j <= n_int; ++j)
      u[j - 1] = std::sqrt(2.0) * std::sin(kPi * k * j * delta);
    const Eigen::VectorXd sol = solve_tridiag(off, diag, off, u);
    for (int j = 1; j <= spec.n_obs; ++j) {
      const int node = j * stride;  // 1-based interior index; node == n_grid is the boundary
      f(j - 1, k - 1) = node == n_grid ? 0.0 : sol[node - 1];
    }
  }
  return f;
}

InverseProblem build_ode_problem(const OdeProblemSpec& spec, Rng& rng) {
  InverseProblem prob;
  prob.inverse.forward = ode_forward_matrix(spec);
  prob.inverse.noise_var = Eigen::VectorXd::Constant(spec.n_obs, spec.noise_var);
  prob.inverse.prior_var.resize(spec.n_x);
  for (int k = 1; k <= spec.n_x; ++k)
    prob.inverse.prior_var[k - 1] = spec.kl_scale / (static_cast<double>(k) * k);
  prob.x_ref.resize(spec.n_x);
  for (int k = 0; k < spec.n_x; ++k)
    prob.x_ref[k] = std::sqrt(prob.inverse.prior_var[k]) * rng.normal();
  prob.y_ref = prob.inverse.forward * prob.x_ref;
  prob.inverse.data = prob.y_ref;
  prob.inverse.check();
  return prob;
}

InverseProblem build_gp_problem(const GpProblemSpec& spec, Rng& rng) {
  if (spec.n_x < 1 || spec.n_y < 1)
    throw parameter_error("problem sizes must be at least 1");
  InverseProblem prob;
  prob.inverse.forward.resize(spec.n_y, spec.n_x);
  for (int i = 1; i <= spec.n_y; ++i)
    for (int k = 1; k <= spec.n_x; ++k)
      prob.inverse.forward(i - 1, k - 1) =
          std::sqrt(2.0) * std::sin(kPi * k * i / static_cast<double>(spec.n_y));
  prob.inverse.noise_var = Eigen::VectorXd::Ones(spec.n_y);
  prob.inverse.prior_var.resize(spec.n_x);
  for (int k = 1; k <= spec.n_x; ++k)
    prob.inverse.prior_var[k - 1] = 1.0 / (static_cast<double>(k) * k);
  prob.x_ref.resize(spec.n_x);
  for (int k = 0; k < spec.n_x; ++k)
    prob.x_ref[k] = std::sqrt(prob.inverse.prior_var[k]) * rng.normal();
  prob.y_ref = prob.inverse.forward * prob.x_ref;
  prob.inverse.data = prob.y_ref;
  prob.inverse.check();
  return prob;
}

}  // namespace steinflow

#include "otrf/gp.hpp"

#include <cmath>
#include <numbers>

#include "otrf/error.hpp"

namespace otrf {
namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& a, const char* what) {
  const Eigen::Index n = a.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = std::max(a.trace() / static_cast<double>(std::max<Eigen::Index>(n, 1)), 1e-300);
  for (double jitter = 1e-8; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
    llt.compute(a + jitter * scale * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericFailure(std::string(what) + ": matrix not positive definite after jitter");
}

GaussianPosterior exact_posterior(const Eigen::MatrixXd& k_dd, const Eigen::MatrixXd& k_pd,
                                  const Eigen::MatrixXd& k_pp, const Eigen::VectorXd& y,
                                  double sigma_n) {
  if (!(sigma_n > 0.0)) throw InvalidRequest("exact_posterior: sigma_n must be positive");
  const Eigen::Index nd = k_dd.rows(), np = k_pp.rows();
  if (k_dd.cols() != nd || k_pp.cols() != np || k_pd.rows() != np || k_pd.cols() != nd ||
      y.size() != nd)
    throw InvalidRequest("exact_posterior: inconsistent block shapes");
  if (np == 0) throw InvalidRequest("exact_posterior: empty prediction set");
  const double s2 = sigma_n * sigma_n;
  GaussianPosterior post;
  if (nd == 0) {
    post.mean = Eigen::VectorXd::Zero(np);
    post.cov = k_pp + s2 * Eigen::MatrixXd::Identity(np, np);
    return post;
  }
  const auto llt = robust_cholesky(k_dd + s2 * Eigen::MatrixXd::Identity(nd, nd), "exact_posterior");
  post.mean = k_pd * llt.solve(y);
  const Eigen::MatrixXd v = llt.matrixL().solve(k_pd.transpose());
  post.cov = symmetrize(k_pp - v.transpose() * v + s2 * Eigen::MatrixXd::Identity(np, np));
  return post;
}

GaussianPosterior approx_posterior(const FeatureMatrix& phi_d, const FeatureMatrix& phi_p,
                                   const Eigen::VectorXd& y, double sigma_n) {
  if (!(sigma_n > 0.0)) throw InvalidRequest("approx_posterior: sigma_n must be positive");
  if (phi_d.rows() != phi_p.rows()) throw InvalidRequest("approx_posterior: feature dims differ");
  if (phi_d.cols() != y.size()) throw InvalidRequest("approx_posterior: targets do not match data");
  const Eigen::Index m = phi_d.rows(), np = phi_p.cols();
  const double s2 = sigma_n * sigma_n;
  const Eigen::MatrixXd a = phi_d * phi_d.transpose() / s2 + Eigen::MatrixXd::Identity(m, m);
  const auto llt = robust_cholesky(a, "approx_posterior");
  GaussianPosterior post;
  post.mean = phi_p.transpose() * llt.solve(phi_d * y) / s2;
  const Eigen::MatrixXd v = llt.matrixL().solve(phi_p);
  post.cov = symmetrize(v.transpose() * v + s2 * Eigen::MatrixXd::Identity(np, np));
  return post;
}

double log_marginal_likelihood(const Eigen::MatrixXd& k_dd, const Eigen::VectorXd& y,
                               double sigma_n) {
  const Eigen::Index n = k_dd.rows();
  if (k_dd.cols() != n || y.size() != n) throw InvalidRequest("log_marginal_likelihood: shapes");
  const auto llt = robust_cholesky(
      k_dd + sigma_n * sigma_n * Eigen::MatrixXd::Identity(n, n), "log_marginal_likelihood");
  const double fit = y.dot(llt.solve(y));
  return -0.5 * fit - 0.5 * log_det(llt) - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const GaussianKernelParams& params, Eigen::Vector3d* grad_log) {
  params.validate();
  const Eigen::Index n = x.rows();
  if (y.size() != n) throw InvalidRequest("log_marginal_likelihood: targets do not match inputs");
  const Eigen::MatrixXd kf = gaussian_kernel_matrix(x, x, params);
  const double s2 = params.noise_scale * params.noise_scale;
  const auto llt =
      robust_cholesky(kf + s2 * Eigen::MatrixXd::Identity(n, n), "log_marginal_likelihood");
  const Eigen::VectorXd alpha = llt.solve(y);
  const double value = -0.5 * y.dot(alpha) - 0.5 * log_det(llt) -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (grad_log) {
    // d/dtheta = 1/2 tr((alpha alpha^T - K^{-1}) dK/dtheta)
    const Eigen::MatrixXd w = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd dl(n, n);
    const double l2 = params.lengthscale * params.lengthscale;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) dl(i, j) = kf(i, j) * (x.row(i) - x.row(j)).squaredNorm() / l2;
    (*grad_log)(0) = 0.5 * w.cwiseProduct(dl).sum();
    (*grad_log)(1) = 0.5 * w.cwiseProduct(2.0 * kf).sum();
    (*grad_log)(2) = 0.5 * w.trace() * 2.0 * s2;
  }
  return value;
}

GaussianKernelParams fit_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const GaussianKernelParams& init, const GpFitConfig& config) {
  if (x.rows() == 0) throw InvalidRequest("fit_hyperparams: empty training set");
  if (x.rows() > kMaxGpTrainPoints)
    throw InvalidRequest("fit_hyperparams: at most 256 training points are supported");
  if (config.steps < 0 || config.steps > 5000)
    throw InvalidRequest("fit_hyperparams: steps must lie in [0, 5000]");
  init.validate();
  Eigen::Vector3d theta(std::log(init.lengthscale), std::log(init.output_scale),
                        std::log(std::max(init.noise_scale, config.noise_floor)));
  Eigen::Vector3d m1 = Eigen::Vector3d::Zero(), m2 = Eigen::Vector3d::Zero();
  const double b1 = 0.9, b2 = 0.999;
  auto params_of = [](const Eigen::Vector3d& t) {
    return GaussianKernelParams{std::exp(t(0)), std::exp(t(1)), std::exp(t(2))};
  };
  for (int step = 1; step <= config.steps; ++step) {
    Eigen::Vector3d grad;
    const double lml = log_marginal_likelihood(x, y, params_of(theta), &grad);
    if (!std::isfinite(lml) || !grad.allFinite())
      throw NumericFailure("fit_hyperparams: non-finite marginal likelihood at step " +
                           std::to_string(step));
    grad = -grad;  // minimise the negative evidence
    if (config.fix_lengthscale) grad(0) = 0.0;
    m1 = b1 * m1 + (1.0 - b1) * grad;
    m2 = b2 * m2 + (1.0 - b2) * grad.cwiseProduct(grad);
    const Eigen::Vector3d mhat = m1 / (1.0 - std::pow(b1, step));
    const Eigen::Vector3d vhat = m2 / (1.0 - std::pow(b2, step));
    theta -= config.lr * mhat.cwiseQuotient((vhat.array().sqrt() + 1e-8).matrix());
    theta(2) = std::max(theta(2), std::log(config.noise_floor));
  }
  return params_of(theta);
}

double gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q, bool per_datapoint) {
  const Eigen::Index k = p.mean.size();
  if (q.mean.size() != k || p.cov.rows() != k || q.cov.rows() != k)
    throw InvalidRequest("gaussian_kl: dimension mismatch");
  if (k == 0) throw InvalidRequest("gaussian_kl: empty distributions");
  const auto lq = robust_cholesky(q.cov, "gaussian_kl (q)");
  const auto lp = robust_cholesky(p.cov, "gaussian_kl (p)");
  const Eigen::MatrixXd ql = lq.matrixL();
  const Eigen::MatrixXd pl = lp.matrixL();
  // tr(Sq^{-1} Sp) = |Lq^{-1} Lp|_F^2
  const double trace_term = ql.triangularView<Eigen::Lower>().solve(pl).squaredNorm();
  const Eigen::VectorXd diff = q.mean - p.mean;
  const double maha = ql.triangularView<Eigen::Lower>().solve(diff).squaredNorm();
  double kl = 0.5 * (trace_term + maha - static_cast<double>(k) + log_det(lq) - log_det(lp));
  if (kl < -1e-10) throw NumericFailure("gaussian_kl: negative divergence " + std::to_string(kl));
  kl = std::max(kl, 0.0);
  return per_datapoint ? kl / static_cast<double>(k) : kl;
}

}  // namespace otrf

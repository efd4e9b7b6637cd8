#pragma once

#include <Eigen/Dense>

#include "otrf/eucrf.hpp"

namespace otrf {

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Cholesky factor of a symmetric matrix, adding diagonal jitter of
/// 1e-8 * trace / N escalated by 10x up to 1e-4 * trace / N when needed.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& a, const char* what);

/// Predictive posterior in observation space: the covariance includes the
/// sigma_n^2 I observation noise. An empty training set yields the prior.
GaussianPosterior exact_posterior(const Eigen::MatrixXd& k_dd, const Eigen::MatrixXd& k_pd,
                                  const Eigen::MatrixXd& k_pp, const Eigen::VectorXd& y,
                                  double sigma_n);

/// Feature-space posterior; columns of the feature matrices are datapoints.
/// Identical to exact_posterior on the kernel blocks phi^T phi.
GaussianPosterior approx_posterior(const FeatureMatrix& phi_d, const FeatureMatrix& phi_p,
                                   const Eigen::VectorXd& y, double sigma_n);

double log_marginal_likelihood(const Eigen::MatrixXd& k_dd, const Eigen::VectorXd& y,
                               double sigma_n);

/// Evidence of a Gaussian-kernel GP and its gradient with respect to
/// (log lengthscale, log output scale, log noise scale).
double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const GaussianKernelParams& params,
                               Eigen::Vector3d* grad_log = nullptr);

struct GpFitConfig {
  int steps = 1000;
  double lr = 1e-2;
  bool fix_lengthscale = false;
  double noise_floor = 1e-4;  // sigma_n is kept above this
};

inline constexpr int kMaxGpTrainPoints = 256;

GaussianKernelParams fit_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const GaussianKernelParams& init, const GpFitConfig& config);

/// KL(p || q) in nats; divided by the dimension when `per_datapoint` is set.
double gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q,
                   bool per_datapoint = false);

}  // namespace otrf

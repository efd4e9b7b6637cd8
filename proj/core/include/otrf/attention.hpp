#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otrf/couplings.hpp"
#include "otrf/stats.hpp"

namespace otrf {

/// Softmax kernel exp(x_i . x_j) between the rows of X.
Eigen::MatrixXd softmax_kernel_matrix(const Eigen::MatrixXd& tokens);

/// Row-normalized softmax kernel; rows sum to one.
Eigen::MatrixXd attention_exact(const Eigen::MatrixXd& tokens);

/// Positive random features for the softmax kernel, one column per token:
/// sqrt(1/m) exp(-|x|^2 / 2) exp(w_k . x).
Eigen::MatrixXd softmax_features(const Eigen::MatrixXd& tokens, const FrequencyEnsemble& ens);

Eigen::MatrixXd attention_from_features(const Eigen::MatrixXd& features);

/// E[(sum_k exp(r_k u_k . s))^2] over the ensemble's directions with the norms
/// held fixed, for |s| = v. Directions follow the coupling's block layout:
/// orthogonal within a block (with the negated copy for antithetic blocks),
/// independent across blocks and for iid ensembles.
double direction_averaged_second_moment(const std::vector<double>& norms, double v, int d,
                                        const CouplingSpec& coupling);

struct AttentionConfig {
  int num_features = 16;
  CouplingSpec coupling;
  int trials = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool direction_averaged = true;  // also compute the direction-integrated variance
};

struct AttentionStats {
  MeanSe attention_mse;         // (1/N^2) sum_ij (a_hat - a)^2 per trial
  double kernel_variance = 0.0;  // mean over pairs of the empirical Var(k_hat)
  double kernel_covariance = 0.0;  // mean over i, j1 != j2 of Cov(k_hat_ij1, k_hat_ij2)
  MeanSe kernel_variance_averaged;  // direction-integrated estimate of mean Var(k_hat)
  int trials = 0;
  std::vector<double> trial_mse;     // per-trial attention MSE, in trial order
};

AttentionStats attention_estimate(const Eigen::MatrixXd& tokens, const AttentionConfig& config);

/// Mean pointwise kernel variance under orthogonal+PNC minus that under plain
/// orthogonal ensembles of the same size. The two second moments differ only
/// in the terms of each norm pair, so only those are sampled: the pair's first
/// norm is shared, the second is 1-u coupled (PNC) or independent.
MeanSe pnc_variance_difference(const Eigen::MatrixXd& tokens, int num_features, int samples,
                               std::uint64_t seed, int threads = 1);

}  // namespace otrf

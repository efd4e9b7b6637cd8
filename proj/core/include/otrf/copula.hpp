#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otrf/couplings.hpp"
#include "otrf/eucrf.hpp"

namespace otrf {

/// Fixed reparameterization noise for one Monte Carlo draw: per block, the
/// Gaussian copula noise and an orthogonal direction frame.
struct CopulaDraw {
  std::vector<Eigen::VectorXd> eps;        // one length-d vector per block
  std::vector<Eigen::MatrixXd> directions;  // one d x d orthonormal frame (rows) per block
};

struct CopulaSetup {
  Featurizer featurizer = Featurizer::rff;
  int blocks = 1;           // independent orthogonal blocks of d frequencies
  bool antithetic = false;  // append the negated block (2d frequencies per block)
};

std::vector<CopulaDraw> draw_copula_noise(int mc_samples, int blocks, int d, Rng& rng);

/// Ensemble realised from explicit noise; the coupling tag records the copula.
FrequencyEnsemble copula_ensemble(const CorrelationParams& params, const CopulaDraw& draw,
                                  bool antithetic);

/// Mean Gram RMSE over the given draws. When `grad` is non-null it receives
/// the reparameterization gradient with respect to theta (same layout).
double copula_objective(const CorrelationParams& params, const Eigen::MatrixXd& dataset,
                        const GaussianKernelParams& kernel, const CopulaSetup& setup,
                        const std::vector<CopulaDraw>& draws, std::vector<double>* grad = nullptr);

/// Monte Carlo estimate of the expected Gram RMSE under the copula coupling,
/// with fresh noise from `rng`.
double copula_loss(const CorrelationParams& params, const Eigen::MatrixXd& dataset,
                   const GaussianKernelParams& kernel, const CopulaSetup& setup, int mc_samples,
                   Rng& rng);

struct CopulaTrainConfig {
  int steps = 2000;
  int mc_samples = 8;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double init = 1e-3;
};

struct CopulaFit {
  CorrelationParams params;
  std::vector<double> loss_trace;
};

CopulaFit optimize_copula(const Eigen::MatrixXd& dataset, const GaussianKernelParams& kernel,
                          const CopulaSetup& setup, const CopulaTrainConfig& config,
                          std::uint64_t seed);

/// Trailing moving average of a loss trace.
std::vector<double> smooth_trace(const std::vector<double>& trace, int window);

}  // namespace otrf

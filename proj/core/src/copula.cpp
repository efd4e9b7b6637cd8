#include "otrf/copula.hpp"

#include <cmath>

#include "otrf/error.hpp"

namespace otrf {
namespace {

struct Realised {
  Eigen::MatrixXd chol;
  std::vector<Eigen::VectorXd> g;      // per block: L eps
  std::vector<std::vector<double>> r;  // per block: norms
};

Realised realise(const CorrelationParams& params, const CopulaDraw& draw, ChiParams chi) {
  Realised out{cholesky_from_params(params), {}, {}};
  for (const auto& eps : draw.eps) {
    out.g.push_back(out.chol.triangularView<Eigen::Lower>() * eps);
    out.r.push_back(copula_norms_from_noise(out.chol, chi, eps));
  }
  return out;
}

}  // namespace

std::vector<CopulaDraw> draw_copula_noise(int mc_samples, int blocks, int d, Rng& rng) {
  if (mc_samples < 1 || blocks < 1) throw InvalidRequest("draw_copula_noise: counts must be >= 1");
  std::vector<CopulaDraw> draws(static_cast<std::size_t>(mc_samples));
  for (auto& draw : draws) {
    for (int b = 0; b < blocks; ++b) {
      Eigen::VectorXd eps(d);
      for (auto& e : eps) e = standard_normal(rng);
      draw.eps.push_back(std::move(eps));
      draw.directions.push_back(sample_orthogonal_directions(d, d, rng));
    }
  }
  return draws;
}

FrequencyEnsemble copula_ensemble(const CorrelationParams& params, const CopulaDraw& draw,
                                  bool antithetic) {
  const int d = params.size();
  const ChiParams chi(d);
  const Eigen::MatrixXd chol = cholesky_from_params(params);
  const int block = antithetic ? 2 * d : d;
  const int blocks = static_cast<int>(draw.eps.size());
  FrequencyEnsemble ens{Eigen::MatrixXd(blocks * block, d), CouplingSpec::copula(params, antithetic),
                        0};
  for (int b = 0; b < blocks; ++b) {
    const std::vector<double> r = copula_norms_from_noise(chol, chi, draw.eps[b]);
    for (int i = 0; i < d; ++i) {
      ens.freqs.row(b * block + i) = r[i] * draw.directions[b].row(i);
      if (antithetic) ens.freqs.row(b * block + d + i) = -ens.freqs.row(b * block + i);
    }
  }
  return ens;
}

double copula_objective(const CorrelationParams& params, const Eigen::MatrixXd& dataset,
                        const GaussianKernelParams& kernel, const CopulaSetup& setup,
                        const std::vector<CopulaDraw>& draws, std::vector<double>* grad) {
  if (dataset.rows() == 0) throw InvalidRequest("copula_loss: empty dataset");
  if (draws.empty()) throw InvalidRequest("copula_loss: no Monte Carlo draws");
  kernel.validate();
  const int d = params.size();
  if (dataset.cols() != d) throw InvalidRequest("copula_loss: dataset dimension != copula size");
  const ChiParams chi(d);
  const Eigen::Index n = dataset.rows();
  const Eigen::MatrixXd exact = gaussian_kernel_matrix(dataset, dataset, kernel);
  const Eigen::MatrixXd xs = dataset / kernel.lengthscale;
  const double s2 = kernel.output_scale * kernel.output_scale;
  const double nn = static_cast<double>(n * n);

  if (grad) grad->assign(params.theta().size(), 0.0);
  double total = 0.0;
  for (const auto& draw : draws) {
    const FrequencyEnsemble ens = copula_ensemble(params, draw, setup.antithetic);
    const Eigen::MatrixXd est = gram_estimate(featurize(dataset, ens, kernel, setup.featurizer));
    const Eigen::MatrixXd err = est - exact;
    const double rmse = std::sqrt(err.squaredNorm() / nn);
    total += rmse;
    if (!grad || rmse == 0.0) continue;

    const Realised re = realise(params, draw, chi);
    const double m = static_cast<double>(ens.count());
    const Eigen::VectorXd sq = xs.rowwise().squaredNorm();
    for (std::size_t b = 0; b < draw.eps.size(); ++b) {
      // dRMSE/dr_k for each norm in the block.
      Eigen::VectorXd dr = Eigen::VectorXd::Zero(d);
      const Eigen::MatrixXd& dirs = draw.directions[b];
      for (int k = 0; k < d; ++k) {
        const double rk = re.r[b][k];
        double acc = 0.0;
        if (setup.featurizer == Featurizer::rff) {
          // K_ij = s2/m sum cos(r u.(x_i - x_j)); the negated copy contributes identically.
          const Eigen::VectorXd p = xs * dirs.row(k).transpose();
          for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
              const double t = p(i) - p(j);
              acc += err(i, j) * (-std::sin(rk * t) * t);
            }
          if (setup.antithetic) acc *= 2.0;
        } else {
          const Eigen::VectorXd p = xs * dirs.row(k).transpose();
          for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
              const double t = p(i) + p(j);
              const double base = -sq(i) - sq(j);
              double term = std::exp(base + rk * t) * t;
              if (setup.antithetic) term -= std::exp(base - rk * t) * t;
              acc += err(i, j) * term;
            }
        }
        dr(k) = acc * s2 / m / (nn * rmse);
      }
      // Chain through r = F_chi^{-1}(Phi(g)) and g = L(theta) eps.
      const Eigen::VectorXd& eps = draw.eps[b];
      const Eigen::VectorXd& g = re.g[b];
      for (int a = 1; a < d; ++a) {
        const double dens = chi_pdf(re.r[b][a], chi);
        if (!(dens > 0.0)) continue;
        const double dg_to_loss = dr(a) * gauss_pdf(g(a)) / dens;
        double s_sq = 1.0;
        for (int c = 0; c < a; ++c) s_sq += params(a, c) * params(a, c);
        const double s = std::sqrt(s_sq);
        for (int c = 0; c < a; ++c) {
          const double dg = eps(c) / s - params(a, c) * g(a) / s_sq;
          (*grad)[CorrelationParams::flat_index(a, c)] += dg_to_loss * dg;
        }
      }
    }
  }
  const double count = static_cast<double>(draws.size());
  if (grad)
    for (auto& v : *grad) v /= count;
  return total / count;
}

double copula_loss(const CorrelationParams& params, const Eigen::MatrixXd& dataset,
                   const GaussianKernelParams& kernel, const CopulaSetup& setup, int mc_samples,
                   Rng& rng) {
  if (dataset.rows() == 0) throw InvalidRequest("copula_loss: empty dataset");
  const auto draws = draw_copula_noise(mc_samples, setup.blocks, params.size(), rng);
  return copula_objective(params, dataset, kernel, setup, draws);
}

CopulaFit optimize_copula(const Eigen::MatrixXd& dataset, const GaussianKernelParams& kernel,
                          const CopulaSetup& setup, const CopulaTrainConfig& config,
                          std::uint64_t seed) {
  if (config.steps < 0) throw InvalidRequest("optimize_copula: steps must be >= 0");
  if (dataset.rows() == 0) throw InvalidRequest("optimize_copula: empty dataset");
  const int d = static_cast<int>(dataset.cols());
  CopulaFit fit{CorrelationParams::independence(d, config.init), {}};
  auto theta = fit.params.theta();
  std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0), grad;
  Rng rng(seed);
  for (int step = 1; step <= config.steps; ++step) {
    const auto draws = draw_copula_noise(config.mc_samples, setup.blocks, d, rng);
    const double loss = copula_objective(fit.params, dataset, kernel, setup, draws, &grad);
    bool finite = std::isfinite(loss);
    for (double g : grad) finite = finite && std::isfinite(g);
    if (!finite)
      throw NumericFailure("optimize_copula: non-finite loss or gradient at step " +
                           std::to_string(step));
    fit.loss_trace.push_back(loss);
    const double c1 = 1.0 - std::pow(config.beta1, step);
    const double c2 = 1.0 - std::pow(config.beta2, step);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * grad[i];
      m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      theta[i] -= config.lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + config.adam_eps);
    }
  }
  return fit;
}

std::vector<double> smooth_trace(const std::vector<double>& trace, int window) {
  if (window < 1) throw InvalidRequest("smooth_trace: window must be >= 1");
  std::vector<double> out(trace.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    acc += trace[i];
    if (i >= static_cast<std::size_t>(window)) acc -= trace[i - window];
    out[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

}  // namespace otrf

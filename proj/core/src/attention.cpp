#include "otrf/attention.hpp"

#include <cmath>

#include "otrf/eucrf.hpp"
#include "otrf/error.hpp"
#include "otrf/parallel.hpp"

namespace otrf {

Eigen::MatrixXd softmax_kernel_matrix(const Eigen::MatrixXd& tokens) {
  return (tokens * tokens.transpose()).array().exp().matrix();
}

Eigen::MatrixXd attention_exact(const Eigen::MatrixXd& tokens) {
  if (tokens.rows() == 0) throw InvalidRequest("attention_exact: no tokens");
  Eigen::MatrixXd k = softmax_kernel_matrix(tokens);
  for (Eigen::Index i = 0; i < k.rows(); ++i) k.row(i) /= k.row(i).sum();
  return k;
}

Eigen::MatrixXd softmax_features(const Eigen::MatrixXd& tokens, const FrequencyEnsemble& ens) {
  if (tokens.cols() != ens.dim()) throw InvalidRequest("softmax_features: dimension mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(ens.count()));
  Eigen::MatrixXd phi = ens.freqs * tokens.transpose();  // m x N
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    const double base = -0.5 * tokens.row(j).squaredNorm();
    for (Eigen::Index k = 0; k < phi.rows(); ++k) {
      const double e = phi(k, j) + base;
      if (e > 700.0) throw NumericFailure("softmax_features: exponent overflow");
      phi(k, j) = scale * std::exp(e);
    }
  }
  return phi;
}

Eigen::MatrixXd attention_from_features(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd k = features.transpose() * features;
  for (Eigen::Index i = 0; i < k.rows(); ++i) k.row(i) /= k.row(i).sum();
  return k;
}

double direction_averaged_second_moment(const std::vector<double>& norms, double v, int d,
                                        const CouplingSpec& coupling) {
  if (coupling.kind == CouplingKind::halton)
    throw InvalidRequest("direction-averaged moments are undefined for deterministic points");
  const double gamma = std::exp(std::lgamma(0.5 * d));
  const int m = static_cast<int>(norms.size());
  const bool blocked = coupling.orthogonal_blocks();
  const int block = blocked ? coupling.block_size(d) : 1;
  const bool antithetic = block == 2 * d;

  // E exp(r u.s) for a single uniform direction, as a function of r.
  std::vector<double> single(m);
  for (int k = 0; k < m; ++k) single[k] = gamma * cost_rlf(norms[k], 0.0, v, d);

  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    total += gamma * cost_rlf(norms[k], 0.0, 2.0 * v, d);
    for (int l = k + 1; l < m; ++l) {
      double pair;
      if (blocked && k / block == l / block) {
        if (antithetic && l - k == d)
          pair = 1.0;
        else
          pair = gamma * cost_rlf(norms[k], norms[l], v, d);
      } else {
        pair = single[k] * single[l];
      }
      total += 2.0 * pair;
    }
  }
  return total;
}

AttentionStats attention_estimate(const Eigen::MatrixXd& tokens, const AttentionConfig& config) {
  const Eigen::Index n = tokens.rows();
  const int d = static_cast<int>(tokens.cols());
  if (n == 0) throw InvalidRequest("attention_estimate: no tokens");
  if (config.trials < 2) throw InvalidRequest("attention_estimate: need at least two trials");
  const Eigen::MatrixXd exact_k = softmax_kernel_matrix(tokens);
  const Eigen::MatrixXd exact_a = attention_exact(tokens);
  const double m = config.num_features;

  struct Trial {
    double mse = 0.0;
    double averaged_var = 0.0;
    Eigen::MatrixXd k;
  };
  std::vector<Trial> trials(static_cast<std::size_t>(config.trials));
  parallel_for(trials.size(), config.threads, [&](std::size_t t) {
    const auto ens =
        build_ensemble(config.num_features, d, config.coupling, stream_seed(config.seed, t));
    const Eigen::MatrixXd phi = softmax_features(tokens, ens);
    Trial& out = trials[t];
    out.k = phi.transpose() * phi;
    out.mse = (attention_from_features(phi) - exact_a).squaredNorm() / static_cast<double>(n * n);
    if (config.direction_averaged) {
      std::vector<double> norms(static_cast<std::size_t>(ens.count()));
      for (int k = 0; k < ens.count(); ++k) norms[k] = ens.freqs.row(k).norm();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          if (j < i) continue;
          const double v = (tokens.row(i) + tokens.row(j)).norm();
          const double c = std::exp(-0.5 * (tokens.row(i).squaredNorm() + tokens.row(j).squaredNorm()));
          const double second = c * c / (m * m) *
                                direction_averaged_second_moment(norms, v, d, config.coupling);
          acc += (j == i ? 1.0 : 2.0) * (second - exact_k(i, j) * exact_k(i, j));
        }
      out.averaged_var = acc / static_cast<double>(n * n);
    }
  });

  AttentionStats stats;
  stats.trials = config.trials;
  std::vector<double> mse, avg;
  for (const auto& t : trials) {
    mse.push_back(t.mse);
    avg.push_back(t.averaged_var);
  }
  stats.attention_mse = mean_se(mse);
  stats.trial_mse = mse;
  if (config.direction_averaged) stats.kernel_variance_averaged = mean_se(avg);

  // Empirical moments: per-entry variance and, per row, the variance of the
  // row sum, whose excess over the summed variances is the covariance mass.
  double var_sum = 0.0, cov_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    RunningStats row;
    double row_var = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      RunningStats entry;
      for (const auto& t : trials) entry.push(t.k(i, j));
      row_var += entry.variance();
    }
    for (const auto& t : trials) row.push(t.k.row(i).sum());
    var_sum += row_var;
    cov_sum += row.variance() - row_var;
  }
  stats.kernel_variance = var_sum / static_cast<double>(n * n);
  stats.kernel_covariance = n > 1 ? cov_sum / static_cast<double>(n * n * (n - 1)) : 0.0;
  return stats;
}

MeanSe pnc_variance_difference(const Eigen::MatrixXd& tokens, int num_features, int samples,
                               std::uint64_t seed, int threads) {
  const Eigen::Index n = tokens.rows();
  const int d = static_cast<int>(tokens.cols());
  if (n == 0 || d == 0) throw InvalidRequest("pnc_variance_difference: no tokens");
  if (num_features < 1) throw InvalidRequest("pnc_variance_difference: need features");
  if (samples < 2) throw InvalidRequest("pnc_variance_difference: need at least two samples");
  const double gamma = std::exp(std::lgamma(0.5 * d));
  const double m = num_features;
  const int pairs = (num_features / d) * (d / 2) + (num_features % d) / 2;
  const ChiParams chi{d};

  // Weight of each unordered token pair in the mean over all N^2 entries,
  // times the 2 * pairs ordered partner terms per ensemble.
  std::vector<double> v, w;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double c = std::exp(-(tokens.row(i).squaredNorm() + tokens.row(j).squaredNorm()));
      v.push_back((tokens.row(i) + tokens.row(j)).norm());
      w.push_back((j == i ? 1.0 : 2.0) * c / (m * m) * 2.0 * pairs / static_cast<double>(n * n));
    }

  std::vector<double> diff(static_cast<std::size_t>(samples));
  parallel_for(diff.size(), threads, [&](std::size_t s) {
    Rng rng = make_stream(seed, s);
    const double u = uniform01(rng);
    const auto [r1, r2] = negative_monotone_pair(u, chi);
    const double r3 = chi_inv_cdf(uniform01(rng), chi);
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
      acc += w[k] * gamma * (cost_rlf(r1, r2, v[k], d) - cost_rlf(r1, r3, v[k], d));
    diff[s] = acc;
  });
  return mean_se(diff);
}

}  // namespace otrf

#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "otrf/attention.hpp"
#include "otrf/error.hpp"
#include "otrf/eucrf.hpp"
#include "otrf/mathcore.hpp"

using namespace otrf;

TEST(Attention, ExactRowsSumToOne) {
  Rng rng(1);
  const Eigen::MatrixXd x = oracle::gaussian_points(7, 4, rng, 0.5);
  const Eigen::MatrixXd a = attention_exact(x);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-14);
  EXPECT_THROW(attention_exact(Eigen::MatrixXd(0, 3)), InvalidRequest);
}

TEST(Attention, IdenticalTokensUniform) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 3, 0.4);
  EXPECT_TRUE(attention_exact(x).isApprox(Eigen::MatrixXd::Constant(5, 5, 0.2), 1e-14));
}

TEST(Attention, SingleTokenHasZeroError) {
  Rng rng(2);
  const Eigen::MatrixXd x = oracle::gaussian_points(1, 4, rng);
  AttentionConfig cfg;
  cfg.num_features = 4;
  cfg.coupling = CouplingSpec::of(CouplingKind::orthogonal);
  cfg.trials = 10;
  const auto stats = attention_estimate(x, cfg);
  EXPECT_NEAR(stats.attention_mse.mean, 0.0, 1e-28);
}

TEST(Attention, SoftmaxFeaturesUnbiased) {
  Rng rng(3);
  const Eigen::MatrixXd x = oracle::gaussian_points(3, 4, rng, 0.5);
  const Eigen::MatrixXd k = softmax_kernel_matrix(x);
  RunningStats s;
  for (int t = 0; t < 20000; ++t) {
    const auto ens = build_ensemble(4, 4, CouplingSpec::of(CouplingKind::orthogonal_pnc), stream_seed(4, t));
    const Eigen::MatrixXd phi = softmax_features(x, ens);
    s.push((phi.transpose() * phi)(0, 2));
  }
  EXPECT_LT(std::abs(s.mean() - k(0, 2)), 3.5 * s.standard_error());
}

// The direction-averaged second moment, averaged over norms, must equal the
// plain Monte Carlo second moment of the estimator.
TEST(Attention, DirectionAveragedMomentMatchesMonteCarlo) {
  const int d = 3;
  Eigen::VectorXd s(d);
  s << 0.4, -0.3, 0.5;
  for (auto kind : {CouplingKind::iid, CouplingKind::orthogonal, CouplingKind::orthogonal_pnc,
                    CouplingKind::orthogonal_pnc_antithetic}) {
    const auto spec = CouplingSpec::of(kind);
    const int m = spec.block_size(d) * (kind == CouplingKind::iid ? 2 : 1);
    RunningStats direct, averaged;
    for (int t = 0; t < 40000; ++t) {
      const auto ens = build_ensemble(m, d, spec, stream_seed(5, t));
      const double sum = (ens.freqs * s).array().exp().sum();
      direct.push(sum * sum);
      std::vector<double> norms(m);
      for (int k = 0; k < m; ++k) norms[k] = ens.freqs.row(k).norm();
      averaged.push(direction_averaged_second_moment(norms, s.norm(), d, spec));
    }
    const double se = std::hypot(direct.standard_error(), averaged.standard_error());
    EXPECT_LT(std::abs(direct.mean() - averaged.mean()), 4.0 * se) << coupling_kind_name(kind);
  }
}

TEST(Attention, ReportsAllMoments) {
  Rng rng(6);
  const Eigen::MatrixXd x = oracle::gaussian_points(4, 4, rng, 1.0 / std::sqrt(2.0));
  AttentionConfig cfg;
  cfg.num_features = 4;
  cfg.coupling = CouplingSpec::of(CouplingKind::orthogonal);
  cfg.trials = 200;
  const auto stats = attention_estimate(x, cfg);
  EXPECT_GT(stats.attention_mse.mean, 0.0);
  EXPECT_GT(stats.kernel_variance, 0.0);
  EXPECT_GT(stats.kernel_variance_averaged.mean, 0.0);
  EXPECT_TRUE(std::isfinite(stats.kernel_covariance));
  EXPECT_EQ(stats.trials, 200);
}

TEST(Attention, PncVarianceDifferenceMatchesQuadrature) {
  const int d = 4, m = 4;
  Eigen::MatrixXd x(1, d);
  x << 0.3, -0.2, 0.1, 0.25;
  const double v = 2.0 * x.norm();
  const ChiParams chi{d};
  const double gamma = std::exp(std::lgamma(0.5 * d));

  // Midpoint rule over u for the coupled pair and over (u, u') for the independent one.
  const int grid = 400;
  std::vector<double> r(grid);
  for (int i = 0; i < grid; ++i) r[i] = chi_inv_cdf((i + 0.5) / grid, chi);
  double coupled = 0.0, independent = 0.0;
  for (int i = 0; i < grid; ++i) {
    coupled += cost_rlf(r[i], r[grid - 1 - i], v, d) / grid;
    for (int j = 0; j < grid; j += 4) independent += cost_rlf(r[i], r[j], v, d) / (grid * grid / 4);
  }
  const double c = std::exp(-2.0 * x.squaredNorm());
  const double expected = c / (m * m) * 2.0 * 2.0 * gamma * (coupled - independent);

  const MeanSe est = pnc_variance_difference(x, m, 20000, 8);
  EXPECT_LT(est.mean, 0.0);
  EXPECT_LT(std::abs(est.mean - expected), 3.0 * est.se + 1e-3 * std::abs(expected));
}

TEST(Attention, PncVarianceDifferenceVanishesWithoutPairs) {
  Rng rng(9);
  const Eigen::MatrixXd x = oracle::gaussian_points(3, 4, rng, 0.3);
  const MeanSe est = pnc_variance_difference(x, 1, 50, 1);
  EXPECT_EQ(est.mean, 0.0);
  EXPECT_THROW(pnc_variance_difference(x, 4, 1, 1), InvalidRequest);
}

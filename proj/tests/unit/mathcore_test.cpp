#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "otrf/error.hpp"
#include "otrf/mathcore.hpp"
#include "otrf/rng.hpp"
#include "otrf/stats.hpp"

using namespace otrf;

TEST(GaussCdf, KnownValues) {
  EXPECT_DOUBLE_EQ(gauss_cdf(0.0), 0.5);
  EXPECT_NEAR(gauss_cdf(1.959964), 0.975, 1e-6);
  // Tails are evaluated directly, so the symmetry holds to rounding of 1 - x.
  EXPECT_NEAR(gauss_cdf(-3.0), 1.0 - gauss_cdf(3.0), 0x1p-53);
  EXPECT_GT(gauss_cdf(-30.0), 0.0);
  EXPECT_THROW(gauss_cdf(std::nan("")), DomainError);
  EXPECT_THROW(gauss_cdf(INFINITY), DomainError);
}

TEST(GaussInvCdf, RoundTripAndEdges) {
  EXPECT_NEAR(gauss_inv_cdf(0.5), 0.0, 1e-14);
  EXPECT_NEAR(gauss_inv_cdf(0.975), 1.959964, 1e-5);
  for (double u : {1e-12, 0.001, 0.123, 0.5, 0.77, 0.999999})
    EXPECT_NEAR(gauss_cdf(gauss_inv_cdf(u)), u, 1e-10 * std::max(1.0, u)) << u;
  EXPECT_THROW(gauss_inv_cdf(0.0), DomainError);
  EXPECT_THROW(gauss_inv_cdf(1.0), DomainError);
}

TEST(Chi, CdfClosedForms) {
  EXPECT_EQ(chi_cdf(0.0, ChiParams(3)), 0.0);
  EXPECT_NEAR(chi_cdf(std::sqrt(2.0 * std::log(2.0)), ChiParams(2)), 0.5, 1e-14);
  // chi_1 is the half-normal.
  EXPECT_NEAR(chi_cdf(1.3, ChiParams(1)), 2.0 * gauss_cdf(1.3) - 1.0, 1e-13);
  EXPECT_THROW(chi_cdf(-0.1, ChiParams(2)), DomainError);
  EXPECT_THROW(ChiParams(0), DomainError);
}

TEST(Chi, InverseCdf) {
  EXPECT_NEAR(chi_inv_cdf(0.5, ChiParams(3)), 1.5382, 1e-3);
  EXPECT_EQ(chi_inv_cdf(0.0, ChiParams(4)), 0.0);
  for (int d : {1, 2, 4, 8, 16})
    for (double u : {1e-6, 0.05, 0.5, 0.9, 0.999999})
      EXPECT_NEAR(chi_cdf(chi_inv_cdf(u, ChiParams(d)), ChiParams(d)), u, 1e-9) << d << " " << u;
  EXPECT_THROW(chi_inv_cdf(1.0, ChiParams(2)), DomainError);
}

TEST(Chi, InverseCdfSamplesPassKs) {
  for (int d : {1, 2, 4, 8}) {
    Rng rng(100 + d);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = chi_inv_cdf(uniform01(rng), ChiParams(d));
    const auto r = ks_test(xs, [d](double x) { return chi_cdf(std::max(x, 0.0), ChiParams(d)); });
    EXPECT_GT(r.p_value, 0.01) << "d=" << d;
  }
}

TEST(IncompleteGamma, ComplementAndSeriesSplit) {
  for (double a : {0.5, 1.0, 4.0, 10.0})
    for (double x : {0.1, 1.0, 5.0, 20.0})
      EXPECT_NEAR(regularized_gamma_p(a, x) + regularized_gamma_q(a, x), 1.0, 1e-13);
  // P(1, x) = 1 - e^{-x}
  EXPECT_NEAR(regularized_gamma_p(1.0, 2.5), 1.0 - std::exp(-2.5), 1e-14);
}

TEST(Halton, RadicalInverse) {
  const std::vector<double> expected{0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(halton(i + 1, 2), expected[i]);
  EXPECT_NEAR(halton(2, 3), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(nth_prime(0), 2u);
  EXPECT_EQ(nth_prime(7), 19u);
}

TEST(Geometric, CdfAndInverse) {
  const GeometricParams half(0.5);
  EXPECT_DOUBLE_EQ(geometric_cdf(0, half), 0.5);
  EXPECT_EQ(geometric_inv_cdf(0.8, half), 2);
  EXPECT_EQ(geometric_inv_cdf(0.0, half), 0);
  EXPECT_EQ(geometric_inv_cdf(0.75, half), 1);
  for (double p : {0.1, 0.3, 0.5, 0.9}) {
    const GeometricParams g(p);
    for (std::int64_t l = 0; l < 40 && geometric_cdf(l, g) < 1.0; ++l) {
      EXPECT_EQ(geometric_inv_cdf(geometric_cdf(l, g), g), l) << p << " " << l;
      if (l > 0 && geometric_cdf(l - 1, g) + 1e-12 < 1.0)
        EXPECT_GT(geometric_inv_cdf(geometric_cdf(l - 1, g) + 1e-12, g), l - 1);
    }
  }
  EXPECT_THROW(GeometricParams(0.0), DomainError);
  EXPECT_THROW(GeometricParams(1.0), DomainError);
}

TEST(Stats, RunningStatsMerge) {
  RunningStats a, b, all;
  for (int i = 0; i < 10; ++i) {
    (i < 4 ? a : b).push(i * 0.5);
    all.push(i * 0.5);
  }
  a.merge(b);
  EXPECT_NEAR(a.mean(), all.mean(), 1e-14);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-14);
}

TEST(Stats, ChiSquareAcceptsModel) {
  Rng rng(7);
  const GeometricParams g(0.5);
  std::vector<double> counts(12, 0.0), probs(12, 0.0);
  for (int i = 0; i < 100000; ++i) {
    const auto l = geometric_inv_cdf(uniform01(rng), g);
    counts[std::min<std::int64_t>(l, 11)] += 1.0;
  }
  for (int l = 0; l < 11; ++l) probs[l] = geometric_cdf(l, g) - geometric_cdf(l - 1, g);
  probs[11] = 1.0 - geometric_cdf(10, g);
  EXPECT_GT(chi_square_test(counts, probs).p_value, 0.01);
}

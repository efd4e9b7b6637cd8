#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace otrf {

/// Welford accumulator for mean / variance / standard error.
class RunningStats {
 public:
  void push(double x) noexcept;
  void merge(const RunningStats& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;  // unbiased sample variance
  double standard_error() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> xs);

/// Delta-method standard error of a ratio of two independent means.
MeanSe ratio_of_means(MeanSe numerator, MeanSe denominator);

/// Standard error of a difference of two independent means.
double difference_se(MeanSe a, MeanSe b);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Pearson chi-square goodness of fit. `expected_probs` gives the model
/// probability of each bin; the final bin should absorb the tail so the
/// probabilities sum to one. Adjacent bins are pooled until each expects at
/// least five observations.
TestResult chi_square_test(std::span<const double> observed_counts,
                           std::span<const double> expected_probs);

/// Kolmogorov distribution survival function P(K > x).
double kolmogorov_survival(double x);

}  // namespace otrf

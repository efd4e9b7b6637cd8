#include "otrf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otrf/error.hpp"
#include "otrf/mathcore.hpp"

namespace otrf {

void RunningStats::push(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
  n_ += other.n_;
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::standard_error() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

MeanSe mean_se(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.push(x);
  return {s.mean(), s.standard_error()};
}

MeanSe ratio_of_means(MeanSe num, MeanSe den) {
  if (den.mean == 0.0) throw NumericFailure("ratio_of_means: zero denominator");
  const double r = num.mean / den.mean;
  const double rel_num = num.mean != 0.0 ? num.se / num.mean : 0.0;
  const double rel_den = den.se / den.mean;
  return {r, std::fabs(r) * std::sqrt(rel_num * rel_num + rel_den * rel_den)};
}

double difference_se(MeanSe a, MeanSe b) { return std::sqrt(a.se * a.se + b.se * b.se); }

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidRequest("ks_test: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sqrt_n = std::sqrt(n);
  // Stephens' small-sample correction of the asymptotic distribution.
  const double p = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
  return {d, p, 0};
}

TestResult chi_square_test(std::span<const double> observed, std::span<const double> probs) {
  if (observed.size() != probs.size() || observed.empty())
    throw InvalidRequest("chi_square_test: bin count mismatch");
  double total = 0.0;
  for (double o : observed) total += o;
  if (total <= 0.0) throw InvalidRequest("chi_square_test: no observations");

  std::vector<double> obs_pooled;
  std::vector<double> exp_pooled;
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += probs[i] * total;
    if (e_acc >= 5.0) {
      obs_pooled.push_back(o_acc);
      exp_pooled.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp_pooled.empty()) {
      obs_pooled.push_back(o_acc);
      exp_pooled.push_back(e_acc);
    } else {
      obs_pooled.back() += o_acc;
      exp_pooled.back() += e_acc;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < obs_pooled.size(); ++i) {
    const double diff = obs_pooled[i] - exp_pooled[i];
    stat += diff * diff / exp_pooled[i];
  }
  const int dof = static_cast<int>(obs_pooled.size()) - 1;
  const double p = dof > 0 ? regularized_gamma_q(0.5 * dof, 0.5 * stat) : 1.0;
  return {stat, p, dof};
}

}  // namespace otrf

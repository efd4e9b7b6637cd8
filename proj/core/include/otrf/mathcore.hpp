#pragma once

#include <cstdint>

namespace otrf {

/// Degrees of freedom of a chi distribution (the norm of a d-dim standard
/// Gaussian vector).
class ChiParams {
 public:
  explicit ChiParams(int dof);
  int dof() const noexcept { return dof_; }

 private:
  int dof_;
};

/// Per-step halting probability of a random walk. Walk lengths count edges,
/// so P(length = l) = p (1 - p)^l for l = 0, 1, ...
class GeometricParams {
 public:
  explicit GeometricParams(double p_halt);
  double p_halt() const noexcept { return p_halt_; }

 private:
  double p_halt_;
};

double gauss_cdf(double x);
double gauss_pdf(double x) noexcept;
double gauss_inv_cdf(double u);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without
/// cancellation in the upper tail.
double regularized_gamma_q(double a, double x);

double chi_cdf(double x, ChiParams d);
double chi_pdf(double x, ChiParams d);
double chi_inv_cdf(double u, ChiParams d);

/// Radical inverse of `index` in `base` (van der Corput / Halton coordinate).
double halton(std::uint64_t index, unsigned base);
/// The k-th prime, k = 0 -> 2. Used to pick Halton bases per coordinate.
unsigned nth_prime(int k);

double geometric_cdf(std::int64_t length, GeometricParams g);
std::int64_t geometric_inv_cdf(double u, GeometricParams g);

}  // namespace otrf

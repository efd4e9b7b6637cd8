#include "otrf/mathcore.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "otrf/error.hpp"

namespace otrf {
namespace {

constexpr int kGammaMaxIter = 1000;
constexpr double kGammaEps = 1e-16;
constexpr double kTiny = 1e-300;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

// Series expansion of P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

bool is_prime(unsigned n) {
  if (n < 2) return false;
  for (unsigned k = 2; k * k <= n; ++k)
    if (n % k == 0) return false;
  return true;
}

}  // namespace

ChiParams::ChiParams(int dof) : dof_(dof) {
  if (dof < 1) throw DomainError("ChiParams: dof must be >= 1");
}

GeometricParams::GeometricParams(double p_halt) : p_halt_(p_halt) {
  if (!(p_halt > 0.0 && p_halt < 1.0))
    throw DomainError("GeometricParams: p_halt must lie in (0, 1)");
}

double gauss_cdf(double x) {
  require_finite(x, "gauss_cdf");
  if (x > 0.0) return 1.0 - gauss_cdf(-x);
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double gauss_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double gauss_inv_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("gauss_inv_cdf: u must lie in (0, 1)");

  // Acklam's rational approximation, then Halley steps against erfc.
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
    const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= step / (1.0 + 0.5 * x * step);
  }
  return x;
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("regularized_gamma_p: a must be positive");
  if (x < 0.0) throw DomainError("regularized_gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw DomainError("regularized_gamma_q: a must be positive");
  if (x < 0.0) throw DomainError("regularized_gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi_cdf(double x, ChiParams d) {
  if (std::isnan(x)) throw DomainError("chi_cdf: NaN argument");
  if (x < 0.0) throw DomainError("chi_cdf: x must be nonnegative");
  return regularized_gamma_p(0.5 * d.dof(), 0.5 * x * x);
}

double chi_pdf(double x, ChiParams d) {
  if (x < 0.0) throw DomainError("chi_pdf: x must be nonnegative");
  const double k = d.dof();
  if (x == 0.0) return k == 1 ? std::sqrt(2.0 / std::numbers::pi) : 0.0;
  const double log_pdf = (k - 1.0) * std::log(x) - 0.5 * x * x - (0.5 * k - 1.0) * std::log(2.0) -
                         std::lgamma(0.5 * k);
  return std::exp(log_pdf);
}

double chi_inv_cdf(double u, ChiParams d) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("chi_inv_cdf: u must lie in [0, 1)");
  if (u == 0.0) return 0.0;

  double lo = 0.0;
  double hi = std::max(1.0, std::sqrt(static_cast<double>(d.dof())));
  while (chi_cdf(hi, d) < u) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NumericFailure("chi_inv_cdf: failed to bracket quantile");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi_cdf(mid, d) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double halton(std::uint64_t index, unsigned base) {
  if (!is_prime(base)) throw DomainError("halton: base must be prime");
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

unsigned nth_prime(int k) {
  if (k < 0) throw DomainError("nth_prime: negative index");
  unsigned candidate = 1;
  for (int found = -1; found < k;) {
    ++candidate;
    if (is_prime(candidate)) ++found;
  }
  return candidate;
}

double geometric_cdf(std::int64_t length, GeometricParams g) {
  if (length < 0) return 0.0;
  return -std::expm1(static_cast<double>(length + 1) * std::log1p(-g.p_halt()));
}

std::int64_t geometric_inv_cdf(double u, GeometricParams g) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("geometric_inv_cdf: u must lie in [0, 1)");
  if (u <= g.p_halt()) return 0;
  // F(l) >= u  <=>  (l + 1) log(1 - p) <= log(1 - u)
  const double ratio = std::log1p(-u) / std::log1p(-g.p_halt());
  auto l = static_cast<std::int64_t>(std::ceil(ratio)) - 1;
  l = std::max<std::int64_t>(l, 0);
  while (l > 0 && geometric_cdf(l - 1, g) >= u) --l;
  while (geometric_cdf(l, g) < u) ++l;
  return l;
}

}  // namespace otrf

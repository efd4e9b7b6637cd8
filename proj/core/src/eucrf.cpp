#include "otrf/eucrf.hpp"

#include <cmath>
#include <ostream>

#include "otrf/error.hpp"

namespace otrf {
namespace {

void check_dims(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b)
    throw InvalidRequest(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

double cost_series(double w1, double w2, double t, int d, double sign,
                   const CostSeriesConfig& cfg) {
  if (w1 < 0.0 || w2 < 0.0 || t < 0.0) throw DomainError("cost series: inputs must be nonnegative");
  if (d < 1) throw DomainError("cost series: d must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw InvalidRequest("cost series: tolerance must be positive");
  const double a = t * t * (w1 * w1 + w2 * w2);
  const double half_d = 0.5 * d;
  double term = std::exp(-std::lgamma(half_d));
  double sum = term;
  double largest = std::abs(term);
  for (int k = 1; k < cfg.max_terms; ++k) {
    term *= sign * a / (4.0 * k * (k - 1 + half_d));
    sum += term;
    largest = std::max(largest, std::abs(term));
    const bool shrinking = 4.0 * (k + 1) * (k + half_d) > a;
    if (shrinking && std::abs(term) < cfg.tolerance * std::max(std::abs(sum), largest))
      return sum;
  }
  throw NumericFailure("cost series did not converge within " + std::to_string(cfg.max_terms) +
                       " terms");
}

}  // namespace

void GaussianKernelParams::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    throw InvalidRequest("kernel lengthscale must be positive");
  if (!(output_scale > 0.0) || !std::isfinite(output_scale))
    throw InvalidRequest("kernel output scale must be positive");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
    throw InvalidRequest("kernel noise scale must be nonnegative");
}

Featurizer parse_featurizer(const std::string& name) {
  if (name == "rff") return Featurizer::rff;
  if (name == "rlf") return Featurizer::rlf;
  throw InvalidRequest("unknown featurizer '" + name + "' (expected rff or rlf)");
}

const char* featurizer_name(Featurizer f) noexcept { return f == Featurizer::rff ? "rff" : "rlf"; }

double gaussian_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const GaussianKernelParams& params) {
  check_dims(x.size(), y.size(), "gaussian_kernel");
  const double l = params.lengthscale;
  const double s = params.output_scale;
  return s * s * std::exp(-(x - y).squaredNorm() / (2.0 * l * l));
}

Eigen::MatrixXd gaussian_kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       const GaussianKernelParams& params) {
  check_dims(a.cols(), b.cols(), "gaussian_kernel_matrix");
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k(i, j) = gaussian_kernel(a.row(i).transpose(), b.row(j).transpose(), params);
  return k;
}

Eigen::VectorXd rff_features(const Eigen::VectorXd& x, const FrequencyEnsemble& ens,
                             const GaussianKernelParams& params) {
  check_dims(x.size(), ens.dim(), "rff_features");
  const int m = ens.count();
  const Eigen::VectorXd proj = ens.freqs * (x / params.lengthscale);
  const double scale = params.output_scale / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd phi(2 * m);
  for (int i = 0; i < m; ++i) {
    phi(2 * i) = scale * std::sin(proj(i));
    phi(2 * i + 1) = scale * std::cos(proj(i));
  }
  return phi;
}

Eigen::VectorXd rlf_features(const Eigen::VectorXd& x, const FrequencyEnsemble& ens,
                             const GaussianKernelParams& params) {
  check_dims(x.size(), ens.dim(), "rlf_features");
  const int m = ens.count();
  const Eigen::VectorXd xs = x / params.lengthscale;
  const Eigen::VectorXd proj = ens.freqs * xs;
  const double base = -xs.squaredNorm();
  const double scale = params.output_scale / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd phi(m);
  for (int i = 0; i < m; ++i) {
    const double e = proj(i) + base;
    // Outside this range the feature overflows or underflows to zero, which
    // breaks positivity of the estimate.
    if (!(std::abs(e) <= 700.0))
      throw NumericFailure("rlf_features: exponent " + std::to_string(e) +
                           " out of range; enlarge the lengthscale");
    phi(i) = scale * std::exp(e);
  }
  return phi;
}

FeatureMatrix featurize(const Eigen::MatrixXd& points, const FrequencyEnsemble& ens,
                        const GaussianKernelParams& params, Featurizer featurizer) {
  const int rows = featurizer == Featurizer::rff ? 2 * ens.count() : ens.count();
  FeatureMatrix phi(rows, points.rows());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const Eigen::VectorXd x = points.row(j).transpose();
    phi.col(j) = featurizer == Featurizer::rff ? rff_features(x, ens, params)
                                               : rlf_features(x, ens, params);
  }
  return phi;
}

Eigen::MatrixXd gram_estimate(const FeatureMatrix& features) {
  return features.transpose() * features;
}

double relative_rmse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& exact) {
  if (estimate.rows() != exact.rows() || estimate.cols() != exact.cols())
    throw InvalidRequest("relative_rmse: shape mismatch");
  if (estimate.size() == 0) throw InvalidRequest("relative_rmse: empty matrices");
  return std::sqrt((estimate - exact).squaredNorm() / static_cast<double>(estimate.size()));
}

double cost_rff(double w1, double w2, double z, int d, const CostSeriesConfig& cfg) {
  return cost_series(w1, w2, z, d, -1.0, cfg);
}

double cost_rlf(double w1, double w2, double v, int d, const CostSeriesConfig& cfg) {
  return cost_series(w1, w2, v, d, 1.0, cfg);
}

double rlf_lengthscale_heuristic(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw InvalidRequest("rlf_lengthscale_heuristic: empty dataset");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) total += (points.row(i) + points.row(j)).norm();
  const double l = 2.0 * total / static_cast<double>(n * n);
  if (!(l > 0.0)) throw DomainError("rlf_lengthscale_heuristic: all points at the origin");
  return l;
}

void write_gram_csv(std::ostream& out, const Eigen::MatrixXd& gram, const GramCsvMeta& meta) {
  out << "# seed=" << meta.seed << ",coupling=" << meta.coupling << ",m=" << meta.m
      << ",d=" << meta.d << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) out << (j ? "," : "") << gram(i, j);
    out << '\n';
  }
}

}  // namespace otrf

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "otrf/couplings.hpp"

namespace otrf {

struct GaussianKernelParams {
  double lengthscale = 1.0;
  double output_scale = 1.0;
  double noise_scale = 0.0;

  void validate() const;
};

enum class Featurizer { rff, rlf };

Featurizer parse_featurizer(const std::string& name);
const char* featurizer_name(Featurizer f) noexcept;

/// Rows are feature coordinates, columns are datapoints.
using FeatureMatrix = Eigen::MatrixXd;

double gaussian_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const GaussianKernelParams& params);

/// Kernel matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd gaussian_kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       const GaussianKernelParams& params);

/// Random Fourier features, length 2m, interleaved (sin, cos) per frequency.
Eigen::VectorXd rff_features(const Eigen::VectorXd& x, const FrequencyEnsemble& ens,
                             const GaussianKernelParams& params);

/// Random Laplace features, length m, all strictly positive. Throws
/// NumericFailure when an exponent would overflow or underflow; enlarge the
/// lengthscale.
Eigen::VectorXd rlf_features(const Eigen::VectorXd& x, const FrequencyEnsemble& ens,
                             const GaussianKernelParams& params);

/// Features of every row of `points` (N x d), as columns.
FeatureMatrix featurize(const Eigen::MatrixXd& points, const FrequencyEnsemble& ens,
                        const GaussianKernelParams& params, Featurizer featurizer);

Eigen::MatrixXd gram_estimate(const FeatureMatrix& features);

/// sqrt(mean((est - exact)^2)) over all entries.
double relative_rmse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& exact);

struct CostSeriesConfig {
  double tolerance = 1e-12;
  int max_terms = 200;
};

/// Single ordered-pair transport costs; the full ensemble cost sums these
/// over pairs (i, j != i).
double cost_rff(double w1, double w2, double z, int d, const CostSeriesConfig& cfg = {});
double cost_rlf(double w1, double w2, double v, int d, const CostSeriesConfig& cfg = {});

/// Twice the average norm of x_i + x_j over all ordered pairs (rows of X).
double rlf_lengthscale_heuristic(const Eigen::MatrixXd& points);

struct GramCsvMeta {
  std::uint64_t seed = 0;
  std::string coupling;
  int m = 0;
  int d = 0;
};

void write_gram_csv(std::ostream& out, const Eigen::MatrixXd& gram, const GramCsvMeta& meta);

}  // namespace otrf

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "otrf/graph.hpp"
#include "otrf/rng.hpp"

namespace otrf::cli {

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr int kMaxSplitPoints = 256;

struct Dataset {
  Eigen::MatrixXd x;  // one row per datapoint
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
};

/// Numeric CSV with a header row. `target` names the target column; empty
/// selects the last column. Malformed rows and NaN cells are collected and
/// reported together with their line numbers.
Dataset ingest_csv(const std::string& path, const std::string& target);
Dataset parse_csv(std::istream& in, const std::string& target, const std::string& source = "csv");

GraphData ingest_graph(const std::string& path);

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;  // standard deviation; 0 marks a constant column
  double y_mean = 0.0;
  double y_scale = 1.0;

  /// Column statistics of `train`; columns with variance below the floor map to zero.
  static Standardizer fit(const Dataset& train);
  void apply(Dataset& data) const;
};

struct Split {
  Dataset train;
  Dataset test;
};

/// Random split with `train_fraction` of the points for training; each side
/// is then capped at kMaxSplitPoints. Standardization uses training
/// statistics only.
Split make_split(const Dataset& data, double train_fraction, Rng& rng);

/// Keeps at most `cap` rows (a seeded random subset when there are more), standardized.
Dataset cap_and_standardize(const Dataset& data, int cap, Rng& rng);

/// n points in R^d with targets drawn from a Gaussian-kernel GP prior plus noise.
Dataset synthetic_regression(int n, int d, double lengthscale, double noise, Rng& rng);

}  // namespace otrf::cli

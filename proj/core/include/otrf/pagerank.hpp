#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otrf/graph.hpp"
#include "otrf/grf.hpp"

namespace otrf {

/// Stationary distribution of (1 - p) P + (p / N) E, P the uniform-neighbor
/// transition matrix. Power iteration to a 1e-12 L1 residual.
Eigen::VectorXd exact_pagerank(const GraphData& g, double p_halt);

struct PageRankEstimate {
  std::vector<std::int64_t> counts;  // terminal-node counts over all walks
  std::int64_t walks = 0;            // N * m; equals the sum of counts
  Eigen::VectorXd rho;               // counts / walks
};

/// m terminating walks from every node; rho_i is the fraction that end at i.
/// Node j draws from the stream (seed, j).
PageRankEstimate mc_pagerank(const GraphData& g, double p_halt, int m, const WalkCoupling& coupling,
                             std::uint64_t seed, int threads = 1);

struct PageRankSigmaConfig {
  int samples_per_quantile = 200;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Cost C[q, q'] = (1/N) sum_j sum_i T_j[q, i] T_j[q', i], T_j[q, i] the
/// probability that a walk from j with length in tile q ends at i.
Eigen::MatrixXd pagerank_sigma_cost(const GraphData& g, double p_halt, int n,
                                    const PageRankSigmaConfig& config);

SigmaCoupling solve_pagerank_sigma(const GraphData& g, double p_halt, int n,
                                   const PageRankSigmaConfig& config);

}  // namespace otrf

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otrf/graph.hpp"
#include "otrf/grf.hpp"

namespace otrf {

struct Assignment {
  std::vector<int> perm;  // row q is matched to column perm[q]
  double cost = 0.0;
};

/// Minimum-cost perfect matching (shortest augmenting paths with potentials,
/// O(n^3)). Any finite costs, including negative ones.
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Exhaustive search over all n! permutations (oracle for small n).
Assignment brute_force_assignment(const Eigen::MatrixXd& cost);

/// C[q, q'] = ((a_q + a_q') . (b_q + b_q'))^2 for quantile projections a of
/// node i and b of node j (rows indexed by quantile).
Eigen::MatrixXd build_sigma_cost_matrix(const Eigen::MatrixXd& psi_i, const Eigen::MatrixXd& psi_j);

/// Cost averaged over all ordered node pairs, or over `max_pairs` pairs drawn
/// uniformly (seeded) when there are more.
Eigen::MatrixXd average_sigma_cost(const QuantileProjection& qp, std::size_t max_pairs,
                                   std::uint64_t seed);

struct SigmaTrainConfig {
  int walks_per_quantile = 100;
  std::size_t max_pairs = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
};

SigmaCoupling solve_sigma_coupling(const GraphData& g, double p_halt, int n, const ModulationFn& f,
                                   const SigmaTrainConfig& config);

/// Reduced dimension ceil(c log(n) / eps^2).
int jlt_dimension(std::size_t n, double eps, double c = 8.0);

/// Gaussian random projection of the columns of `vectors`: (1/sqrt(r)) G u.
Eigen::MatrixXd jlt_reduce(const Eigen::MatrixXd& vectors, int r, Rng& rng);

/// |sum_q a_q a_q^T|_F^2 with a_q = v_q + v_perm(q); rows of `v` are the v_q.
double quadratic_matching_objective(const Eigen::MatrixXd& v, const std::vector<int>& perm);

/// Best-of-k random linear projections of the quadratic self-pair objective,
/// seeded with the diagonal-restricted Hungarian solution.
Assignment quadratic_matching_random_projection(const Eigen::MatrixXd& v, int k_iters, Rng& rng);

}  // namespace otrf

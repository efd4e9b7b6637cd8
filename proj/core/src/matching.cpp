#include "otrf/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "otrf/error.hpp"
#include "otrf/parallel.hpp"

namespace otrf {

Assignment hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InvalidRequest("hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw InvalidRequest("hungarian: cost matrix has non-finite entries");
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-indexed potentials; column 0 is a virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment out;
  out.perm.assign(n, 0);
  for (int j = 1; j <= n; ++j) out.perm[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.perm[i]);
  return out;
}

Assignment brute_force_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InvalidRequest("brute_force_assignment: cost matrix must be square");
  if (n > 10) throw InvalidRequest("brute_force_assignment: n too large for exhaustive search");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Assignment best{perm, std::numeric_limits<double>::infinity()};
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
    if (c < best.cost) best = {perm, c};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Eigen::MatrixXd build_sigma_cost_matrix(const Eigen::MatrixXd& psi_i, const Eigen::MatrixXd& psi_j) {
  if (psi_i.rows() != psi_j.rows() || psi_i.cols() != psi_j.cols())
    throw InvalidRequest("build_sigma_cost_matrix: projection shapes differ");
  const Eigen::Index n = psi_i.rows();
  const Eigen::MatrixXd gram = psi_i * psi_j.transpose();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a) {
      const double dot = gram(a, a) + gram(a, b) + gram(b, a) + gram(b, b);
      c(a, b) = dot * dot;
    }
  return c;
}

Eigen::MatrixXd average_sigma_cost(const QuantileProjection& qp, std::size_t max_pairs,
                                   std::uint64_t seed) {
  const std::size_t nodes = qp.per_node.size();
  if (nodes == 0) throw InvalidRequest("average_sigma_cost: no nodes");
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(qp.order, qp.order);
  const std::size_t pairs = nodes * nodes;
  if (pairs <= max_pairs) {
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = 0; j < nodes; ++j)
        total += build_sigma_cost_matrix(qp.per_node[i], qp.per_node[j]);
    return total / static_cast<double>(pairs);
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  for (std::size_t s = 0; s < max_pairs; ++s) {
    const std::size_t i = pick(rng), j = pick(rng);
    total += build_sigma_cost_matrix(qp.per_node[i], qp.per_node[j]);
  }
  return total / static_cast<double>(max_pairs);
}

SigmaCoupling solve_sigma_coupling(const GraphData& g, double p_halt, int n, const ModulationFn& f,
                                   const SigmaTrainConfig& config) {
  if (n < 2) throw InvalidRequest("solve_sigma_coupling: n must be >= 2");
  const auto qp = estimate_quantile_projections(g, n, p_halt, f, config.walks_per_quantile,
                                                stream_seed(config.seed, 1), config.threads);
  const Eigen::MatrixXd cost = average_sigma_cost(qp, config.max_pairs, stream_seed(config.seed, 2));
  return SigmaCoupling(hungarian(cost).perm, GeometricParams(p_halt));
}

int jlt_dimension(std::size_t n, double eps, double c) {
  if (n < 2) throw InvalidRequest("jlt_dimension: need at least two vectors");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidRequest("jlt_dimension: eps must lie in (0, 1)");
  return static_cast<int>(std::ceil(c * std::log(static_cast<double>(n)) / (eps * eps)));
}

Eigen::MatrixXd jlt_reduce(const Eigen::MatrixXd& vectors, int r, Rng& rng) {
  if (r < 1) throw InvalidRequest("jlt_reduce: r must be >= 1");
  Eigen::MatrixXd g(r, vectors.rows());
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < r; ++i) g(i, j) = standard_normal(rng);
  return g * vectors / std::sqrt(static_cast<double>(r));
}

double quadratic_matching_objective(const Eigen::MatrixXd& v, const std::vector<int>& perm) {
  const Eigen::Index n = v.rows();
  if (static_cast<Eigen::Index>(perm.size()) != n)
    throw InvalidRequest("quadratic_matching_objective: permutation size mismatch");
  Eigen::MatrixXd a(n, v.cols());
  for (Eigen::Index q = 0; q < n; ++q) a.row(q) = v.row(q) + v.row(perm[q]);
  // |sum_q a_q a_q^T|_F^2 = |A^T A|_F^2
  return (a.transpose() * a).squaredNorm();
}

Assignment quadratic_matching_random_projection(const Eigen::MatrixXd& v, int k_iters, Rng& rng) {
  if (k_iters < 1) throw InvalidRequest("quadratic_matching_random_projection: k_iters must be >= 1");
  const Eigen::Index n = v.rows(), dim = v.cols();
  if (n == 0) return {};
  // Linear weight of pair (k, l): u_kl . g with u_kl = vec(a a^T), a = v_k + v_l,
  // which equals a^T G a for a Gaussian matrix G.
  auto weights = [&](const Eigen::MatrixXd* gmat) {
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::VectorXd a = (v.row(k) + v.row(l)).transpose();
        w(k, l) = gmat ? a.dot(*gmat * a) : std::pow(a.squaredNorm(), 2);
      }
    return w;
  };
  Assignment best = hungarian(weights(nullptr));
  best.cost = quadratic_matching_objective(v, best.perm);
  for (int it = 0; it < k_iters; ++it) {
    Eigen::MatrixXd gmat(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) gmat(i, j) = standard_normal(rng);
    Assignment cand = hungarian(weights(&gmat));
    cand.cost = quadratic_matching_objective(v, cand.perm);
    if (cand.cost < best.cost) best = std::move(cand);
  }
  return best;
}

}  // namespace otrf

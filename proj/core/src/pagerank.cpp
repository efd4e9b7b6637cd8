#include "otrf/pagerank.hpp"

#include <cmath>

#include "otrf/error.hpp"
#include "otrf/matching.hpp"
#include "otrf/parallel.hpp"

namespace otrf {
namespace {

int walk_end(const GraphData& g, int start, std::int64_t length, Rng& rng) {
  int v = start;
  for (std::int64_t s = 0; s < length; ++s) {
    const auto nbrs = g.neighbors(v);
    v = nbrs[std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(rng)].node;
  }
  return v;
}

}  // namespace

Eigen::VectorXd exact_pagerank(const GraphData& g, double p_halt) {
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidRequest("exact_pagerank: p_halt in (0, 1)");
  const int n = g.size();
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd next(n);
  for (int it = 0; it < 100000; ++it) {
    next.setConstant(p_halt / n);
    for (int u = 0; u < n; ++u) {
      const auto nbrs = g.neighbors(u);
      const double share = (1.0 - p_halt) * rho(u) / static_cast<double>(nbrs.size());
      for (const auto& nb : nbrs) next(nb.node) += share;
    }
    next /= next.sum();
    const double residual = (next - rho).lpNorm<1>();
    rho.swap(next);
    if (residual < 1e-12) return rho;
  }
  throw NumericFailure("exact_pagerank: power iteration did not converge");
}

PageRankEstimate mc_pagerank(const GraphData& g, double p_halt, int m, const WalkCoupling& coupling,
                             std::uint64_t seed, int threads) {
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidRequest("mc_pagerank: p_halt in (0, 1)");
  if (m < 1) throw InvalidRequest("mc_pagerank: m must be >= 1");
  if (coupling.paired() && m % 2 != 0)
    throw InvalidRequest("mc_pagerank: paired couplings need an even walker count");
  const int n = g.size();
  std::vector<std::vector<int>> ends(static_cast<std::size_t>(n));
  parallel_for(ends.size(), threads, [&](std::size_t j) {
    Rng rng = make_stream(seed, j);
    auto& out = ends[j];
    out.reserve(static_cast<std::size_t>(m));
    const int start = static_cast<int>(j);
    if (!coupling.paired()) {
      for (int k = 0; k < m; ++k) {
        const auto len = draw_walk_lengths(coupling, p_halt, rng).first;
        out.push_back(walk_end(g, start, len, rng));
      }
      return;
    }
    for (int k = 0; k < m; k += 2) {
      const auto [l1, l2] = draw_walk_lengths(coupling, p_halt, rng);
      out.push_back(walk_end(g, start, l1, rng));
      out.push_back(walk_end(g, start, l2, rng));
    }
  });
  PageRankEstimate est;
  est.counts.assign(static_cast<std::size_t>(n), 0);
  for (const auto& list : ends)
    for (int v : list) ++est.counts[v];
  est.walks = static_cast<std::int64_t>(n) * m;
  est.rho.resize(n);
  for (int i = 0; i < n; ++i)
    est.rho(i) = static_cast<double>(est.counts[i]) / static_cast<double>(est.walks);
  return est;
}

Eigen::MatrixXd pagerank_sigma_cost(const GraphData& g, double p_halt, int n,
                                    const PageRankSigmaConfig& config) {
  if (n < 1) throw InvalidRequest("pagerank_sigma_cost: n must be >= 1");
  if (config.samples_per_quantile < 1)
    throw InvalidRequest("pagerank_sigma_cost: samples_per_quantile must be >= 1");
  const GeometricParams geom(p_halt);
  const int nodes = g.size();
  std::vector<Eigen::MatrixXd> parts(static_cast<std::size_t>(nodes));
  parallel_for(parts.size(), config.threads, [&](std::size_t j) {
    Rng rng = make_stream(config.seed, j);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, nodes);
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < config.samples_per_quantile; ++s) {
        const auto len = length_in_tile(q, n, geom, rng);
        t(q, walk_end(g, static_cast<int>(j), len, rng)) += 1.0;
      }
    t /= static_cast<double>(config.samples_per_quantile);
    parts[j] = t * t.transpose();
  });
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : parts) cost += p;
  return cost / static_cast<double>(nodes);
}

SigmaCoupling solve_pagerank_sigma(const GraphData& g, double p_halt, int n,
                                   const PageRankSigmaConfig& config) {
  if (n < 2) throw InvalidRequest("solve_pagerank_sigma: n must be >= 2");
  const Eigen::MatrixXd cost = pagerank_sigma_cost(g, p_halt, n, config);
  return SigmaCoupling(hungarian(cost).perm, GeometricParams(p_halt));
}

}  // namespace otrf

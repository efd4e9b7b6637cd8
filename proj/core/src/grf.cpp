#include "otrf/grf.hpp"

#include <atomic>
#include <cmath>
#include <ostream>

#include "otrf/error.hpp"
#include "otrf/parallel.hpp"

namespace otrf {
namespace {

std::atomic<std::uint64_t> g_truncations{0};

void check_p_halt(double p_halt) {
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw DomainError("p_halt must lie in (0, 1)");
}

}  // namespace

ModulationFn modulation_from_coefficients(std::span<const double> alpha, int k_max) {
  if (alpha.empty() || !(alpha[0] > 0.0))
    throw InvalidRequest("modulation_from_coefficients: alpha_0 must be positive");
  if (k_max < 0) throw InvalidRequest("modulation_from_coefficients: k_max must be >= 0");
  ModulationFn out;
  out.f.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  out.f[0] = std::sqrt(alpha[0]);
  for (int k = 1; k <= k_max; ++k) {
    double acc = k < static_cast<int>(alpha.size()) ? alpha[k] : 0.0;
    for (int j = 1; j < k; ++j) acc -= out.f[j] * out.f[k - j];
    out.f[k] = acc / (2.0 * out.f[0]);
  }
  return out;
}

ModulationFn modulation_for_kernel(const GraphKernelSpec& spec, int k_max) {
  const auto alpha = taylor_coefficients(spec, k_max);
  return modulation_from_coefficients(alpha, k_max);
}

std::uint64_t grf_truncation_warnings() noexcept { return g_truncations.load(); }
void reset_grf_truncation_warnings() noexcept { g_truncations = 0; }

void accumulate_walk(const WalkRecord& walk, const GraphData& g, const ModulationFn& f,
                     double p_halt, double scale, Eigen::VectorXd& out) {
  check_p_halt(p_halt);
  if (out.size() != g.size()) throw InvalidRequest("accumulate_walk: output has wrong size");
  const int len = walk.length();
  const int kept = std::min(len, f.max_order());
  if (len > kept) g_truncations.fetch_add(static_cast<std::uint64_t>(len - kept));
  double inv_prob = 1.0;  // 1 / p(prefix)
  for (int t = 0; t <= kept; ++t) {
    if (t > 0) inv_prob *= g.neighbor_count(walk.nodes[t - 1]) / (1.0 - p_halt);
    out(walk.nodes[t]) += scale * walk.prefix_weights[t] * f(t) * inv_prob;
  }
}

Eigen::SparseVector<double> project_walk(const WalkRecord& walk, const GraphData& g,
                                         const ModulationFn& f, double p_halt) {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(g.size());
  accumulate_walk(walk, g, f, p_halt, 1.0, dense);
  return dense.sparseView(0.0, 0.0);
}

std::string WalkCoupling::tag() const {
  switch (kind) {
    case Kind::iid: return "iid";
    case Kind::antithetic_termination: return "antithetic";
    case Kind::sigma: return "sigma";
  }
  return "unknown";
}

std::pair<std::int64_t, std::int64_t> draw_walk_lengths(const WalkCoupling& c, double p_halt,
                                                        Rng& rng) {
  check_p_halt(p_halt);
  const GeometricParams geom(p_halt);
  switch (c.kind) {
    case WalkCoupling::Kind::iid:
      return {geometric_inv_cdf(uniform01(rng), geom), 0};
    case WalkCoupling::Kind::antithetic_termination:
      return antithetic_lengths(p_halt, rng);
    case WalkCoupling::Kind::sigma:
      if (!c.sigma) throw InvalidRequest("sigma coupling without a permutation");
      if (std::abs(c.sigma->geometric().p_halt() - p_halt) > 1e-12)
        throw InvalidRequest("sigma coupling was built for a different p_halt");
      return sample_coupled_lengths(*c.sigma, rng);
  }
  return {0, 0};
}

namespace {

void accumulate_feature(const GraphData& g, int node, int m, const WalkCoupling& coupling,
                        const ModulationFn& f, double p_halt, Rng& rng, Eigen::VectorXd& out) {
  if (m < 1) throw InvalidRequest("grf_features: need at least one walker");
  if (coupling.paired() && m % 2 != 0)
    throw InvalidRequest("grf_features: paired couplings need an even walker count");
  const double scale = 1.0 / static_cast<double>(m);
  if (!coupling.paired()) {
    for (int k = 0; k < m; ++k)
      accumulate_walk(simulate_walk(g, node, WalkMode::geometric(p_halt), rng), g, f, p_halt,
                      scale, out);
    return;
  }
  for (int k = 0; k < m; k += 2) {
    const auto [l1, l2] = draw_walk_lengths(coupling, p_halt, rng);
    accumulate_walk(simulate_walk(g, node, WalkMode::fixed(l1), rng), g, f, p_halt, scale, out);
    accumulate_walk(simulate_walk(g, node, WalkMode::fixed(l2), rng), g, f, p_halt, scale, out);
  }
}

}  // namespace

GrfFeature grf_features(const GraphData& g, int node, int m, const WalkCoupling& coupling,
                        const ModulationFn& f, double p_halt, Rng& rng) {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(g.size());
  accumulate_feature(g, node, m, coupling, f, p_halt, rng, dense);
  return {dense.sparseView(0.0, 0.0), m, coupling.tag()};
}

Eigen::MatrixXd grf_feature_matrix(const GraphData& g, int m, const WalkCoupling& coupling,
                                   const ModulationFn& f, double p_halt, std::uint64_t seed,
                                   int threads) {
  const int n = g.size();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(n));
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    rows[i] = Eigen::VectorXd::Zero(n);
    accumulate_feature(g, static_cast<int>(i), m, coupling, f, p_halt, rng, rows[i]);
  });
  for (int i = 0; i < n; ++i) phi.row(i) = rows[i].transpose();
  return phi;
}

Eigen::MatrixXd grf_gram(const Eigen::MatrixXd& features) {
  return features * features.transpose();
}

Eigen::MatrixXd grf_gram(const Eigen::MatrixXd& features_a, const Eigen::MatrixXd& features_b) {
  if (features_a.rows() != features_b.rows() || features_a.cols() != features_b.cols())
    throw InvalidRequest("grf_gram: feature sets differ in shape");
  const Eigen::MatrixXd cross = features_a * features_b.transpose();
  return 0.5 * (cross + cross.transpose());
}

QuantileProjection estimate_quantile_projections(const GraphData& g, int n, double p_halt,
                                                 const ModulationFn& f, int walks_per_quantile,
                                                 std::uint64_t seed, int threads) {
  if (n < 1) throw InvalidRequest("estimate_quantile_projections: n must be >= 1");
  if (walks_per_quantile < 1)
    throw InvalidRequest("estimate_quantile_projections: walks_per_quantile must be >= 1");
  check_p_halt(p_halt);
  const GeometricParams geom(p_halt);
  const int nodes = g.size();
  QuantileProjection qp;
  qp.order = n;
  qp.per_node.resize(static_cast<std::size_t>(nodes));
  const double scale = 1.0 / walks_per_quantile;
  parallel_for(qp.per_node.size(), threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(n, nodes);
    Eigen::VectorXd row(nodes);
    for (int q = 0; q < n; ++q) {
      row.setZero();
      for (int w = 0; w < walks_per_quantile; ++w) {
        const auto len = length_in_tile(q, n, geom, rng);
        accumulate_walk(simulate_walk(g, static_cast<int>(i), WalkMode::fixed(len), rng), g, f,
                        p_halt, scale, row);
      }
      psi.row(q) = row.transpose();
    }
    qp.per_node[i] = std::move(psi);
  });
  return qp;
}

void write_feature_csv(std::ostream& out, const Eigen::MatrixXd& features) {
  out.precision(17);
  out << "node,coord,value\n";
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    for (Eigen::Index j = 0; j < features.cols(); ++j)
      if (features(i, j) != 0.0) out << i << ',' << j << ',' << features(i, j) << '\n';
}

}  // namespace otrf

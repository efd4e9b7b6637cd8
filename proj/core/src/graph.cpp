#include "otrf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "otrf/error.hpp"

namespace otrf {

GraphData::GraphData(int num_nodes, std::vector<Edge> edges)
    : n_(num_nodes), edges_(std::move(edges)) {
  if (n_ < 1) throw InvalidRequest("graph must have at least one node");
  adj_.resize(n_);
  w_ = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_)
      throw InvalidRequest("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                           ") out of range");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InvalidRequest("edge weights must be positive and finite");
    if (w_(e.u, e.v) != 0.0)
      throw InvalidRequest("duplicate edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
    w_(e.u, e.v) = e.weight;
    w_(e.v, e.u) = e.weight;
    adj_[e.u].push_back({e.v, e.weight});
    if (e.u != e.v) adj_[e.v].push_back({e.u, e.weight});
  }
  deg_ = w_.rowwise().sum();
  for (int i = 0; i < n_; ++i)
    if (adj_[i].empty()) throw InvalidRequest("node " + std::to_string(i) + " is isolated");
  for (auto& list : adj_)
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  const Eigen::VectorXd inv_sqrt = deg_.array().rsqrt();
  a_norm_ = inv_sqrt.asDiagonal() * w_ * inv_sqrt.asDiagonal();
}

std::span<const Neighbor> GraphData::neighbors(int node) const {
  if (node < 0 || node >= n_) throw InvalidRequest("node index out of range");
  return adj_[node];
}

Eigen::MatrixXd GraphData::laplacian() const {
  Eigen::MatrixXd l = -w_;
  l.diagonal() += deg_;
  return l;
}

Eigen::MatrixXd GraphData::normalized_laplacian() const {
  return Eigen::MatrixXd::Identity(n_, n_) - a_norm_;
}

bool GraphData::connected() const {
  std::vector<char> seen(n_, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& nb : adj_[v])
      if (!seen[nb.node]) {
        seen[nb.node] = 1;
        ++count;
        stack.push_back(nb.node);
      }
  }
  return count == n_;
}

GraphData erdos_renyi_connected(int n, double p_edge, Rng& rng, int max_attempts) {
  if (n < 2) throw InvalidRequest("erdos_renyi_connected: need at least two nodes");
  if (!(p_edge > 0.0 && p_edge <= 1.0))
    throw InvalidRequest("erdos_renyi_connected: p_edge must lie in (0, 1]");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Edge> edges;
    std::vector<int> deg(n, 0);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (uniform01(rng) < p_edge) {
          edges.push_back({u, v, 1.0});
          ++deg[u];
          ++deg[v];
        }
    if (std::find(deg.begin(), deg.end(), 0) != deg.end()) continue;
    GraphData g(n, std::move(edges));
    if (g.connected()) return g;
  }
  throw NumericFailure("erdos_renyi_connected: no connected sample within the attempt budget");
}

GraphData read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  int max_node = -1;
  std::vector<std::string> bad;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    long long u = 0, v = 0;
    double w = 1.0;
    if (!(ss >> u >> v) || u < 0 || v < 0 || u > 100000000 || v > 100000000) {
      bad.push_back(std::to_string(line_no));
      continue;
    }
    if (!(ss >> w)) {
      if (!ss.eof()) {
        bad.push_back(std::to_string(line_no));
        continue;
      }
      w = 1.0;
    }
    std::string rest;
    if ((ss >> rest) || !std::isfinite(w) || !(w > 0.0)) {
      bad.push_back(std::to_string(line_no));
      continue;
    }
    edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
    max_node = std::max<int>(max_node, static_cast<int>(std::max(u, v)));
  }
  if (!bad.empty()) {
    std::string lines;
    for (const auto& b : bad) lines += (lines.empty() ? "" : ", ") + b;
    throw InvalidRequest("malformed edge list at line(s) " + lines);
  }
  if (max_node < 0) throw InvalidRequest("edge list contains no edges");
  return GraphData(max_node + 1, std::move(edges));
}

void write_edge_list(std::ostream& out, const GraphData& g) {
  out.precision(17);
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (e.weight != 1.0) out << ' ' << e.weight;
    out << '\n';
  }
}

GraphKernelSpec GraphKernelSpec::regularized_laplacian(double sigma, int degree, bool normalized) {
  GraphKernelSpec s;
  s.family = GraphKernelFamily::regularized_laplacian;
  s.sigma = sigma;
  s.degree = degree;
  s.normalized = normalized;
  return s;
}

GraphKernelSpec GraphKernelSpec::p_step(double alpha, int p, bool normalized) {
  GraphKernelSpec s;
  s.family = GraphKernelFamily::p_step;
  s.alpha = alpha;
  s.degree = p;
  s.normalized = normalized;
  return s;
}

GraphKernelSpec GraphKernelSpec::diffusion(double sigma, bool normalized) {
  GraphKernelSpec s;
  s.family = GraphKernelFamily::diffusion;
  s.sigma = sigma;
  s.normalized = normalized;
  return s;
}

GraphKernelSpec GraphKernelSpec::diffusion_rate(double gamma, bool normalized) {
  return diffusion(gamma * std::numbers::sqrt2, normalized);
}

GraphKernelSpec GraphKernelSpec::inverse_cosine(bool normalized) {
  GraphKernelSpec s;
  s.family = GraphKernelFamily::inverse_cosine;
  s.normalized = normalized;
  return s;
}

void GraphKernelSpec::validate() const {
  switch (family) {
    case GraphKernelFamily::regularized_laplacian:
      if (!(sigma >= 0.0) || degree < 1)
        throw InvalidRequest("regularized Laplacian needs sigma >= 0 and degree >= 1");
      break;
    case GraphKernelFamily::p_step:
      if (!(alpha >= 2.0) || degree < 1)
        throw InvalidRequest("p-step random walk kernel needs alpha >= 2 and p >= 1");
      break;
    case GraphKernelFamily::diffusion:
      if (!std::isfinite(sigma)) throw InvalidRequest("diffusion kernel needs finite sigma");
      break;
    case GraphKernelFamily::inverse_cosine:
      break;
  }
}

std::string GraphKernelSpec::tag() const {
  std::ostringstream s;
  switch (family) {
    case GraphKernelFamily::regularized_laplacian:
      s << degree << "-regularized_laplacian(sigma=" << sigma << ")";
      break;
    case GraphKernelFamily::p_step:
      s << degree << "-step_random_walk(alpha=" << alpha << ")";
      break;
    case GraphKernelFamily::diffusion:
      s << "diffusion(sigma=" << sigma << ")";
      break;
    case GraphKernelFamily::inverse_cosine:
      s << "inverse_cosine";
      break;
  }
  if (!normalized) s << "[unnormalized]";
  return s.str();
}

GraphKernelSpec parse_graph_kernel(const std::string& family, double sigma, double alpha,
                                   int degree) {
  GraphKernelSpec spec;
  if (family == "regularized_laplacian")
    spec = GraphKernelSpec::regularized_laplacian(sigma, degree);
  else if (family == "p_step")
    spec = GraphKernelSpec::p_step(alpha, degree);
  else if (family == "diffusion")
    spec = GraphKernelSpec::diffusion(sigma);
  else if (family == "inverse_cosine")
    spec = GraphKernelSpec::inverse_cosine();
  else
    throw InvalidRequest("unknown graph kernel family '" + family + "'");
  spec.validate();
  return spec;
}

Eigen::MatrixXd exact_graph_kernel(const GraphData& g, const GraphKernelSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd l = spec.normalized ? g.normalized_laplacian() : g.laplacian();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l);
  if (eig.info() != Eigen::Success) throw NumericFailure("exact_graph_kernel: eigensolver failed");
  Eigen::VectorXd f(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double lam = eig.eigenvalues()(i);
    switch (spec.family) {
      case GraphKernelFamily::regularized_laplacian:
        f(i) = std::pow(1.0 + spec.sigma * spec.sigma * lam, -spec.degree);
        break;
      case GraphKernelFamily::p_step:
        f(i) = std::pow(spec.alpha - lam, spec.degree);
        break;
      case GraphKernelFamily::diffusion:
        f(i) = std::exp(-0.5 * spec.sigma * spec.sigma * lam);
        break;
      case GraphKernelFamily::inverse_cosine:
        f(i) = std::cos(lam * std::numbers::pi / 4.0);
        break;
    }
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd k = v * f.asDiagonal() * v.transpose();
  return 0.5 * (k + k.transpose());
}

std::vector<double> taylor_coefficients(const GraphKernelSpec& spec, int max_order) {
  spec.validate();
  if (!spec.normalized)
    throw InvalidRequest("taylor_coefficients: only kernels of the normalized Laplacian expand in A_norm");
  if (max_order < 0) throw InvalidRequest("taylor_coefficients: max_order must be >= 0");
  std::vector<double> a(static_cast<std::size_t>(max_order) + 1, 0.0);
  switch (spec.family) {
    case GraphKernelFamily::regularized_laplacian: {
      // (1 + s^2)^{-d} (I - rho A)^{-d}, rho = s^2 / (1 + s^2)
      const double s2 = spec.sigma * spec.sigma;
      const double rho = s2 / (1.0 + s2);
      const int d = spec.degree;
      double c = std::pow(1.0 + s2, -d);  // binom(k + d - 1, d - 1) rho^k, updated incrementally
      for (int k = 0; k <= max_order; ++k) {
        a[k] = c;
        c *= rho * static_cast<double>(k + d) / static_cast<double>(k + 1);
      }
      break;
    }
    case GraphKernelFamily::p_step: {
      // ((alpha - 1) I + A)^p
      const int p = spec.degree;
      for (int k = 0; k <= std::min(p, max_order); ++k) {
        const double binom =
            std::exp(std::lgamma(p + 1.0) - std::lgamma(k + 1.0) - std::lgamma(p - k + 1.0));
        a[k] = std::round(binom) * std::pow(spec.alpha - 1.0, p - k);
      }
      break;
    }
    case GraphKernelFamily::diffusion: {
      const double rate = 0.5 * spec.sigma * spec.sigma;
      double c = std::exp(-rate);
      for (int k = 0; k <= max_order; ++k) {
        a[k] = c;
        c *= rate / static_cast<double>(k + 1);
      }
      break;
    }
    case GraphKernelFamily::inverse_cosine: {
      // cos(c (I - A)) = cos(c) cos(cA) + sin(c) sin(cA), c = pi / 4
      const double c = std::numbers::pi / 4.0;
      double pw = 1.0;  // c^k / k!
      for (int k = 0; k <= max_order; ++k) {
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        a[k] = sign * pw * (k % 2 == 0 ? std::cos(c) : std::sin(c));
        pw *= c / static_cast<double>(k + 1);
      }
      break;
    }
  }
  return a;
}

void write_kernel_csv(std::ostream& out, const Eigen::MatrixXd& kernel) {
  if (kernel.rows() > 2000) throw InvalidRequest("refusing dense kernel export above 2000 nodes");
  out.precision(17);
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) out << (j ? "," : "") << kernel(i, j);
    out << '\n';
  }
}

WalkRecord simulate_walk(const GraphData& g, int start, const WalkMode& mode, Rng& rng) {
  if (start < 0 || start >= g.size()) throw InvalidRequest("simulate_walk: start out of range");
  if (mode.kind == WalkMode::Kind::geometric && !(mode.p_halt > 0.0 && mode.p_halt < 1.0))
    throw InvalidRequest("simulate_walk: p_halt must lie in (0, 1)");
  if (mode.kind == WalkMode::Kind::fixed_length && mode.length < 0)
    throw InvalidRequest("simulate_walk: negative length");
  WalkRecord w;
  w.start = start;
  w.nodes.push_back(start);
  w.prefix_weights.push_back(1.0);
  const Eigen::MatrixXd& a = g.normalized_adjacency();
  int v = start;
  for (std::int64_t step = 0;; ++step) {
    if (mode.kind == WalkMode::Kind::geometric) {
      if (uniform01(rng) < mode.p_halt) break;
    } else if (step >= mode.length) {
      break;
    }
    const auto nbrs = g.neighbors(v);
    const auto pick = std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(rng);
    const int next = nbrs[pick].node;
    w.prefix_weights.push_back(w.prefix_weights.back() * a(v, next));
    w.nodes.push_back(next);
    v = next;
  }
  return w;
}

SigmaCoupling::SigmaCoupling(std::vector<int> sigma, GeometricParams geom)
    : sigma_(std::move(sigma)), geom_(geom) {
  if (sigma_.empty()) throw InvalidRequest("SigmaCoupling: empty permutation");
  std::vector<char> seen(sigma_.size(), 0);
  for (int s : sigma_) {
    if (s < 0 || s >= static_cast<int>(sigma_.size()) || seen[s])
      throw InvalidRequest("SigmaCoupling: not a permutation");
    seen[s] = 1;
  }
}

SigmaCoupling SigmaCoupling::identity(int n, GeometricParams geom) {
  std::vector<int> id(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) id[i] = i;
  return SigmaCoupling(std::move(id), geom);
}

std::int64_t length_in_tile(int q, int n, GeometricParams geom, Rng& rng) {
  const double u = (static_cast<double>(q) + uniform01(rng)) / static_cast<double>(n);
  return geometric_inv_cdf(std::min(u, std::nextafter(1.0, 0.0)), geom);
}

std::pair<std::int64_t, std::int64_t> sample_coupled_lengths(const SigmaCoupling& c, Rng& rng) {
  const int n = c.order();
  const int q = std::uniform_int_distribution<int>(0, n - 1)(rng);
  const auto l1 = length_in_tile(q, n, c.geometric(), rng);
  const auto l2 = length_in_tile(c.permutation()[q], n, c.geometric(), rng);
  return {l1, l2};
}

std::pair<bool, bool> antithetic_halts(double t1, double p_halt) {
  const double t2 = std::fmod(t1 + 0.5, 1.0);
  return {t1 < p_halt, t2 < p_halt};
}

std::pair<std::int64_t, std::int64_t> antithetic_lengths(double p_halt, Rng& rng) {
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidRequest("antithetic termination: p_halt in (0, 1)");
  std::int64_t l1 = 0, l2 = 0;
  bool alive1 = true, alive2 = true;
  while (alive1 || alive2) {
    const auto [h1, h2] = antithetic_halts(uniform01(rng), p_halt);
    if (alive1) {
      if (h1) alive1 = false;
      else ++l1;
    }
    if (alive2) {
      if (h2) alive2 = false;
      else ++l2;
    }
  }
  return {l1, l2};
}

std::pair<WalkRecord, WalkRecord> antithetic_termination_pair(const GraphData& g, int start1,
                                                              int start2, double p_halt, Rng& rng) {
  const auto [l1, l2] = antithetic_lengths(p_halt, rng);
  WalkRecord w1 = simulate_walk(g, start1, WalkMode::fixed(l1), rng);
  WalkRecord w2 = simulate_walk(g, start2, WalkMode::fixed(l2), rng);
  return {std::move(w1), std::move(w2)};
}

}  // namespace otrf

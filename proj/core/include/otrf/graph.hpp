#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "otrf/mathcore.hpp"
#include "otrf/rng.hpp"

namespace otrf {

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

struct Neighbor {
  int node = 0;
  double weight = 1.0;
};

/// Undirected weighted graph without isolated nodes. Self-loops are allowed.
class GraphData {
 public:
  GraphData(int num_nodes, std::vector<Edge> edges);

  int size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(int node) const;
  /// Number of distinct neighbors; random walks choose uniformly among them.
  int neighbor_count(int node) const { return static_cast<int>(neighbors(node).size()); }

  const Eigen::MatrixXd& adjacency() const noexcept { return w_; }
  const Eigen::VectorXd& degrees() const noexcept { return deg_; }
  /// D^{-1/2} W D^{-1/2}, entries used as walk edge weights.
  const Eigen::MatrixXd& normalized_adjacency() const noexcept { return a_norm_; }

  Eigen::MatrixXd laplacian() const;
  Eigen::MatrixXd normalized_laplacian() const;
  bool connected() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adj_;
  Eigen::MatrixXd w_;
  Eigen::VectorXd deg_;
  Eigen::MatrixXd a_norm_;
};

/// G(N, p) conditioned on connectivity by resampling.
GraphData erdos_renyi_connected(int n, double p_edge, Rng& rng, int max_attempts = 10000);

/// Whitespace-separated `u v [weight]` lines, 0-indexed, each undirected edge
/// once. Blank lines and lines starting with '#' are skipped. The node count
/// is one more than the largest index.
GraphData read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const GraphData& g);

enum class GraphKernelFamily { regularized_laplacian, p_step, diffusion, inverse_cosine };

struct GraphKernelSpec {
  GraphKernelFamily family = GraphKernelFamily::regularized_laplacian;
  double sigma = 1.0;  // regularized Laplacian and diffusion
  double alpha = 2.0;  // p-step
  int degree = 1;      // exponent d (regularized Laplacian) or p (p-step)
  bool normalized = true;

  static GraphKernelSpec regularized_laplacian(double sigma, int degree, bool normalized = true);
  static GraphKernelSpec p_step(double alpha, int p, bool normalized = true);
  /// exp(-sigma^2 L / 2)
  static GraphKernelSpec diffusion(double sigma, bool normalized = true);
  /// exp(-gamma^2 L)
  static GraphKernelSpec diffusion_rate(double gamma, bool normalized = true);
  /// cos(L pi / 4)
  static GraphKernelSpec inverse_cosine(bool normalized = true);

  void validate() const;
  std::string tag() const;
};

GraphKernelSpec parse_graph_kernel(const std::string& family, double sigma, double alpha,
                                   int degree);

Eigen::MatrixXd exact_graph_kernel(const GraphData& g, const GraphKernelSpec& spec);

/// Coefficients alpha_0..alpha_max_order of K = sum_k alpha_k A_norm^k.
/// Only defined for kernels of the normalized Laplacian.
std::vector<double> taylor_coefficients(const GraphKernelSpec& spec, int max_order);

/// Dense CSV export, refused above 2000 nodes.
void write_kernel_csv(std::ostream& out, const Eigen::MatrixXd& kernel);

struct WalkRecord {
  int start = 0;
  std::vector<int> nodes;  // nodes[0] == start
  /// prefix_weights[t]: product of normalized-adjacency weights over the first t edges.
  std::vector<double> prefix_weights;

  int length() const noexcept { return static_cast<int>(nodes.size()) - 1; }
};

struct WalkMode {
  enum class Kind { geometric, fixed_length } kind = Kind::geometric;
  double p_halt = 0.5;
  std::int64_t length = 0;

  static WalkMode geometric(double p_halt) { return {Kind::geometric, p_halt, 0}; }
  static WalkMode fixed(std::int64_t length) { return {Kind::fixed_length, 0.0, length}; }
};

WalkRecord simulate_walk(const GraphData& g, int start, const WalkMode& mode, Rng& rng);

/// Walk-length coupling from a permutation of the n quantile tiles of the
/// geometric length distribution. Stored 0-indexed: tile q pairs with sigma[q].
class SigmaCoupling {
 public:
  SigmaCoupling(std::vector<int> sigma, GeometricParams geom);
  static SigmaCoupling identity(int n, GeometricParams geom);

  int order() const noexcept { return static_cast<int>(sigma_.size()); }
  const std::vector<int>& permutation() const noexcept { return sigma_; }
  GeometricParams geometric() const noexcept { return geom_; }

 private:
  std::vector<int> sigma_;
  GeometricParams geom_;
};

/// Uniform variable restricted to tile q (0-indexed) of n, mapped to a length.
std::int64_t length_in_tile(int q, int n, GeometricParams geom, Rng& rng);

std::pair<std::int64_t, std::int64_t> sample_coupled_lengths(const SigmaCoupling& c, Rng& rng);

/// Halting decisions for one timestep of antithetic termination given the
/// first walker's uniform t1; the second uses (t1 + 1/2) mod 1.
std::pair<bool, bool> antithetic_halts(double t1, double p_halt);

std::pair<std::int64_t, std::int64_t> antithetic_lengths(double p_halt, Rng& rng);

std::pair<WalkRecord, WalkRecord> antithetic_termination_pair(const GraphData& g, int start1,
                                                              int start2, double p_halt, Rng& rng);

}  // namespace otrf

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otrf/graph.hpp"

namespace otrf {

inline constexpr int kDefaultModulationOrder = 64;

/// Modulation function f with (f * f)(k) = alpha_k for k <= K_max.
struct ModulationFn {
  std::vector<double> f;

  int max_order() const noexcept { return static_cast<int>(f.size()) - 1; }
  double operator()(std::int64_t k) const noexcept {
    return k < static_cast<std::int64_t>(f.size()) ? f[static_cast<std::size_t>(k)] : 0.0;
  }
};

ModulationFn modulation_from_coefficients(std::span<const double> alpha,
                                          int k_max = kDefaultModulationOrder);

/// Modulation function for a graph kernel of the normalized Laplacian.
ModulationFn modulation_for_kernel(const GraphKernelSpec& spec, int k_max = kDefaultModulationOrder);

/// Number of walk prefixes dropped because they exceeded K_max (process-wide).
std::uint64_t grf_truncation_warnings() noexcept;
void reset_grf_truncation_warnings() noexcept;

/// Adds scale * psi(walk) to `out` (dense, length N).
void accumulate_walk(const WalkRecord& walk, const GraphData& g, const ModulationFn& f,
                     double p_halt, double scale, Eigen::VectorXd& out);

Eigen::SparseVector<double> project_walk(const WalkRecord& walk, const GraphData& g,
                                         const ModulationFn& f, double p_halt);

struct WalkCoupling {
  enum class Kind { iid, antithetic_termination, sigma } kind = Kind::iid;
  std::optional<SigmaCoupling> sigma;

  static WalkCoupling iid() { return {Kind::iid, std::nullopt}; }
  static WalkCoupling antithetic() { return {Kind::antithetic_termination, std::nullopt}; }
  static WalkCoupling coupled(SigmaCoupling s) { return {Kind::sigma, std::move(s)}; }

  bool paired() const noexcept { return kind != Kind::iid; }
  std::string tag() const;
};

/// Pairs of walk lengths for the paired couplings; a single geometric length
/// otherwise (second entry unused).
std::pair<std::int64_t, std::int64_t> draw_walk_lengths(const WalkCoupling& c, double p_halt,
                                                        Rng& rng);

struct GrfFeature {
  Eigen::SparseVector<double> values;
  int walkers = 0;
  std::string coupling;
};

GrfFeature grf_features(const GraphData& g, int node, int m, const WalkCoupling& coupling,
                        const ModulationFn& f, double p_halt, Rng& rng);

/// N x N feature matrix, row i = feature of node i. Node i draws from the
/// stream (seed, i), so the result does not depend on the thread count.
Eigen::MatrixXd grf_feature_matrix(const GraphData& g, int m, const WalkCoupling& coupling,
                                   const ModulationFn& f, double p_halt, std::uint64_t seed,
                                   int threads = 1);

/// Phi Phi^T from a single feature set (diagonal slightly biased upward).
Eigen::MatrixXd grf_gram(const Eigen::MatrixXd& features);
/// Symmetrized estimate from two independent feature sets; unbiased everywhere.
Eigen::MatrixXd grf_gram(const Eigen::MatrixXd& features_a, const Eigen::MatrixXd& features_b);

/// psi_hat(q) per node: n x N matrix per node, row q = average projection of
/// fixed-length walks whose lengths come from quantile tile q.
struct QuantileProjection {
  int order = 0;
  std::vector<Eigen::MatrixXd> per_node;
};

QuantileProjection estimate_quantile_projections(const GraphData& g, int n, double p_halt,
                                                 const ModulationFn& f, int walks_per_quantile,
                                                 std::uint64_t seed, int threads = 1);

void write_feature_csv(std::ostream& out, const Eigen::MatrixXd& features);

}  // namespace otrf

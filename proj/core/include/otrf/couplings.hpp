#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "otrf/mathcore.hpp"
#include "otrf/rng.hpp"

namespace otrf {

/// Parameters of a Gaussian-copula norm coupling over m norms.
///
/// Stores the strictly-lower-triangular entries theta(i, j), i > j, of a
/// Cholesky-factor parameterization, row-major: (1,0), (2,0), (2,1), (3,0)...
/// The diagonal is fixed at 1. Entries are signed so that negative
/// correlations (needed to express antithetic-like norm pairings) are
/// representable.
class CorrelationParams {
 public:
  CorrelationParams(int m, std::vector<double> theta);

  /// Near-independence start: every off-diagonal entry set to `value`.
  static CorrelationParams independence(int m, double value = 1e-3);

  int size() const noexcept { return m_; }
  std::span<const double> theta() const noexcept { return theta_; }
  std::span<double> theta() noexcept { return theta_; }

  /// theta(row, col) with the implicit unit diagonal; zero above it.
  double operator()(int row, int col) const;

  static std::size_t flat_index(int row, int col) noexcept {
    return static_cast<std::size_t>(row) * (row - 1) / 2 + col;
  }

 private:
  int m_;
  std::vector<double> theta_;
};

enum class CouplingKind {
  iid,
  halton,
  orthogonal,
  orthogonal_pnc,
  orthogonal_pnc_antithetic,
  positive_monotone,
  copula,
};

struct CouplingSpec {
  CouplingKind kind = CouplingKind::iid;
  std::optional<CorrelationParams> correlation;  // copula only
  bool antithetic = false;                       // copula only: append the negated block
  std::uint64_t halton_offset = 0;               // halton only: points offset+1 .. offset+m

  static CouplingSpec of(CouplingKind kind) { return CouplingSpec{kind, std::nullopt, false, 0}; }
  static CouplingSpec copula(CorrelationParams params, bool antithetic = false);

  bool orthogonal_blocks() const noexcept;
  /// Number of frequencies contributed by one orthogonal block in dimension d.
  int block_size(int d) const noexcept;
  std::string tag() const;
};

/// Parses the plain tags used in configs and reports ("iid", "orthogonal_pnc", ...).
/// Copula couplings carry parameters and are not parseable from a tag.
CouplingKind parse_coupling_kind(std::string_view tag);
std::string_view coupling_kind_name(CouplingKind kind) noexcept;

struct FrequencyEnsemble {
  Eigen::MatrixXd freqs;  // one frequency per row: count() x dim()
  CouplingSpec coupling;
  std::uint64_t seed = 0;

  int count() const noexcept { return static_cast<int>(freqs.rows()); }
  int dim() const noexcept { return static_cast<int>(freqs.cols()); }
};

/// `count` pairwise-orthogonal unit vectors (rows), jointly Haar-rotated.
Eigen::MatrixXd sample_orthogonal_directions(int d, int count, Rng& rng);

/// Norms for one block of `count` frequencies in dimension d, each marginally
/// chi_d, coupled according to `scheme`.
std::vector<double> sample_norms(int count, int d, const CouplingSpec& scheme, Rng& rng);

/// Negative-monotone pair from a single uniform: F(w1) + F(w2) = 1.
std::pair<double, double> negative_monotone_pair(double u, ChiParams d);

FrequencyEnsemble build_ensemble(int m, int d, const CouplingSpec& scheme, std::uint64_t seed);

/// Row-normalized lower-triangular Cholesky factor; L L^T is a correlation matrix.
Eigen::MatrixXd cholesky_from_params(const CorrelationParams& params);

/// Copula norms from explicit standard-normal noise `eps` (length m):
/// g = L eps, w_i = F_chi^{-1}(Phi(g_i)).
std::vector<double> copula_norms_from_noise(const Eigen::MatrixXd& chol, ChiParams d,
                                            const Eigen::VectorXd& eps);
std::vector<double> sample_copula_norms(const CorrelationParams& params, ChiParams d, Rng& rng);

}  // namespace otrf

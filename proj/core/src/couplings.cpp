#include "otrf/couplings.hpp"

#include <cmath>
#include <string>

#include "otrf/error.hpp"

namespace otrf {
namespace {

double open_uniform(Rng& rng) {
  double u = 0.0;
  while (u == 0.0) u = uniform01(rng);
  return u;
}

double chi_draw(ChiParams d, Rng& rng) { return chi_inv_cdf(uniform01(rng), d); }

}  // namespace

CorrelationParams::CorrelationParams(int m, std::vector<double> theta)
    : m_(m), theta_(std::move(theta)) {
  if (m < 1) throw InvalidRequest("CorrelationParams: m must be >= 1");
  if (theta_.size() != static_cast<std::size_t>(m) * (m - 1) / 2)
    throw InvalidRequest("CorrelationParams: expected m(m-1)/2 entries");
  for (double t : theta_)
    if (!std::isfinite(t)) throw InvalidRequest("CorrelationParams: non-finite entry");
}

CorrelationParams CorrelationParams::independence(int m, double value) {
  return CorrelationParams(m, std::vector<double>(static_cast<std::size_t>(m) * (m - 1) / 2, value));
}

double CorrelationParams::operator()(int row, int col) const {
  if (row == col) return 1.0;
  if (col > row) return 0.0;
  return theta_[flat_index(row, col)];
}

CouplingSpec CouplingSpec::copula(CorrelationParams params, bool antithetic) {
  CouplingSpec spec;
  spec.kind = CouplingKind::copula;
  spec.correlation = std::move(params);
  spec.antithetic = antithetic;
  return spec;
}

bool CouplingSpec::orthogonal_blocks() const noexcept {
  return kind != CouplingKind::iid && kind != CouplingKind::halton;
}

int CouplingSpec::block_size(int d) const noexcept {
  const bool doubled = kind == CouplingKind::orthogonal_pnc_antithetic ||
                       (kind == CouplingKind::copula && antithetic);
  return doubled ? 2 * d : d;
}

std::string CouplingSpec::tag() const {
  std::string tag(coupling_kind_name(kind));
  if (kind == CouplingKind::copula && antithetic) tag += "_antithetic";
  return tag;
}

std::string_view coupling_kind_name(CouplingKind kind) noexcept {
  switch (kind) {
    case CouplingKind::iid: return "iid";
    case CouplingKind::halton: return "halton";
    case CouplingKind::orthogonal: return "orthogonal";
    case CouplingKind::orthogonal_pnc: return "orthogonal_pnc";
    case CouplingKind::orthogonal_pnc_antithetic: return "orthogonal_pnc_antithetic";
    case CouplingKind::positive_monotone: return "positive_monotone";
    case CouplingKind::copula: return "copula";
  }
  return "unknown";
}

CouplingKind parse_coupling_kind(std::string_view tag) {
  for (auto kind : {CouplingKind::iid, CouplingKind::halton, CouplingKind::orthogonal,
                    CouplingKind::orthogonal_pnc, CouplingKind::orthogonal_pnc_antithetic,
                    CouplingKind::positive_monotone}) {
    if (coupling_kind_name(kind) == tag) return kind;
  }
  throw InvalidRequest("unknown coupling tag '" + std::string(tag) + "'");
}

Eigen::MatrixXd sample_orthogonal_directions(int d, int count, Rng& rng) {
  if (d < 1) throw InvalidRequest("sample_orthogonal_directions: d must be >= 1");
  if (count < 0 || count > d)
    throw InvalidRequest("sample_orthogonal_directions: count must not exceed d");
  Eigen::MatrixXd gauss(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) gauss(i, j) = standard_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign correction makes Q Haar-distributed rather than biased by the
  // Householder convention.
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q.leftCols(count).transpose();
}

std::pair<double, double> negative_monotone_pair(double u, ChiParams d) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("negative_monotone_pair: u must lie in (0, 1)");
  return {chi_inv_cdf(u, d), chi_inv_cdf(1.0 - u, d)};
}

std::vector<double> sample_norms(int count, int d, const CouplingSpec& scheme, Rng& rng) {
  const ChiParams chi(d);
  std::vector<double> norms(static_cast<std::size_t>(count));
  switch (scheme.kind) {
    case CouplingKind::orthogonal_pnc:
    case CouplingKind::orthogonal_pnc_antithetic: {
      int i = 0;
      for (; i + 1 < count; i += 2) {
        const auto [w1, w2] = negative_monotone_pair(open_uniform(rng), chi);
        norms[i] = w1;
        norms[i + 1] = w2;
      }
      if (i < count) norms[i] = chi_draw(chi, rng);
      break;
    }
    case CouplingKind::positive_monotone: {
      const double w = chi_draw(chi, rng);
      std::fill(norms.begin(), norms.end(), w);
      break;
    }
    case CouplingKind::copula: {
      if (!scheme.correlation || scheme.correlation->size() != count)
        throw InvalidRequest("sample_norms: copula parameters do not match block size");
      norms = sample_copula_norms(*scheme.correlation, chi, rng);
      break;
    }
    default:
      for (auto& w : norms) w = chi_draw(chi, rng);
  }
  return norms;
}

FrequencyEnsemble build_ensemble(int m, int d, const CouplingSpec& scheme, std::uint64_t seed) {
  if (m < 1 || d < 1) throw InvalidRequest("build_ensemble: m and d must be positive");
  Rng rng(seed);
  FrequencyEnsemble ens{Eigen::MatrixXd(m, d), scheme, seed};

  if (scheme.kind == CouplingKind::iid) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) ens.freqs(i, j) = standard_normal(rng);
    return ens;
  }
  if (scheme.kind == CouplingKind::halton) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j)
        ens.freqs(i, j) = gauss_inv_cdf(halton(scheme.halton_offset + i + 1, nth_prime(j)));
    return ens;
  }

  const int block = scheme.block_size(d);
  if (m % block != 0)
    throw InvalidRequest("build_ensemble: m=" + std::to_string(m) +
                         " is not a multiple of the block size " + std::to_string(block) +
                         " required by coupling " + scheme.tag());
  const bool antithetic = block == 2 * d;
  if (scheme.kind == CouplingKind::copula &&
      (!scheme.correlation || scheme.correlation->size() != d))
    throw InvalidRequest("build_ensemble: copula parameters must couple d norms");

  for (int start = 0; start < m; start += block) {
    const Eigen::MatrixXd dirs = sample_orthogonal_directions(d, d, rng);
    const std::vector<double> norms = sample_norms(d, d, scheme, rng);
    for (int i = 0; i < d; ++i) {
      ens.freqs.row(start + i) = norms[i] * dirs.row(i);
      if (antithetic) ens.freqs.row(start + d + i) = -ens.freqs.row(start + i);
    }
  }
  return ens;
}

Eigen::MatrixXd cholesky_from_params(const CorrelationParams& params) {
  const int m = params.size();
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double s2 = 0.0;
    for (int j = 0; j <= i; ++j) s2 += params(i, j) * params(i, j);
    const double s = std::sqrt(s2);
    for (int j = 0; j <= i; ++j) chol(i, j) = params(i, j) / s;
  }
  return chol;
}

std::vector<double> copula_norms_from_noise(const Eigen::MatrixXd& chol, ChiParams d,
                                            const Eigen::VectorXd& eps) {
  const Eigen::VectorXd g = chol.triangularView<Eigen::Lower>() * eps;
  std::vector<double> norms(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    // Clamp away from 1 so the chi quantile stays finite in the far tail.
    const double u = std::min(gauss_cdf(g(i)), 1.0 - 1e-16);
    norms[i] = chi_inv_cdf(u, d);
  }
  return norms;
}

std::vector<double> sample_copula_norms(const CorrelationParams& params, ChiParams d, Rng& rng) {
  Eigen::VectorXd eps(params.size());
  for (auto& e : eps) e = standard_normal(rng);
  return copula_norms_from_noise(cholesky_from_params(params), d, eps);
}

}  // namespace otrf

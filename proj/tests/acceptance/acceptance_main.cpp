// Acceptance suite: one PASS/FAIL line per criterion.
//
//   otrf_acceptance            run every criterion
//   otrf_acceptance 3 7        run the listed criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "otrf/attention.hpp"
#include "otrf/copula.hpp"
#include "otrf/eucrf.hpp"
#include "otrf/gp.hpp"
#include "otrf/graph.hpp"
#include "otrf/grf.hpp"
#include "otrf/matching.hpp"
#include "otrf/pagerank.hpp"
#include "otrf/stats.hpp"
#include "support/oracles.hpp"

using namespace otrf;

namespace {

constexpr std::uint64_t kMaster = 1729;

std::uint64_t seed_for(int criterion, std::uint64_t sub = 0) {
  return stream_seed(kMaster, static_cast<std::uint64_t>(criterion), sub);
}

std::uint64_t seed_for(int criterion, std::uint64_t a, std::uint64_t b) {
  return stream_seed(seed_for(criterion), a, b);
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double z_of(double diff, double se) { return se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY); }

// Synthetic regression data drawn from a GP prior, with hyperparameters fitted
// by marginal likelihood.
struct Regression {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  GaussianKernelParams fit;
};

Regression synthetic_regression(int n, int d, std::uint64_t seed, bool fit = true) {
  Rng rng(seed);
  Regression r;
  r.x.resize(n, d);
  for (auto& v : r.x.reshaped()) v = standard_normal(rng);
  const GaussianKernelParams truth{4.0, 1.0, 0.1};
  const Eigen::MatrixXd k = gaussian_kernel_matrix(r.x, r.x, {truth.lengthscale, truth.output_scale, 0.0});
  const Eigen::MatrixXd l = robust_cholesky(k, "prior").matrixL();
  Eigen::VectorXd z(n);
  for (auto& v : z) v = standard_normal(rng);
  r.y = l * z;
  for (auto& v : r.y) v += truth.noise_scale * standard_normal(rng);
  r.fit = truth;
  if (fit) {
    GpFitConfig cfg;
    cfg.steps = 1000;
    cfg.lr = 0.02;
    r.fit = fit_hyperparams(r.x, r.y, {1.0, 1.0, 0.5}, cfg);
  }
  return r;
}

CouplingKind paired_kind(Featurizer f) {
  return f == Featurizer::rff ? CouplingKind::orthogonal_pnc : CouplingKind::orthogonal_pnc_antithetic;
}

int default_features(Featurizer f, int d) { return f == Featurizer::rff ? d : 2 * d; }

// ---------------------------------------------------------------------------

void criterion_1(Outcome& out) {
  int searches = 0;
  for (int d : {2, 4}) {
    const auto r = oracle::chi_midpoints(6, d);
    for (double v : {0.5, 1.0}) {
      const auto res = oracle::search_permutations(r, [&](double a, double b) { return cost_rlf(a, b, v, d); });
      out.require(res.argmin == oracle::reversal(6) && res.unique_min,
                  "RLF d=" + std::to_string(d) + " v=" + std::to_string(v));
      ++searches;
    }
    const auto res = oracle::search_permutations(r, [&](double a, double b) { return cost_rff(a, b, 0.2, d); });
    out.require(res.argmin == oracle::reversal(6) && res.unique_min, "RFF d=" + std::to_string(d));
    ++searches;
  }
  out.detail << searches << " searches over 720 permutations; reversal is the unique argmin in each";
}

void criterion_2(Outcome& out) {
  const int d = 4, trials = 10000, pairs = 10, alternatives = 50;
  const GaussianKernelParams kp{1.0, 1.0, 0.0};
  Rng rng(seed_for(2));
  int comparisons = 0;
  double worst_z = INFINITY, worst_closed = INFINITY, worst_fit = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd x(d), y(d);
    for (auto& v : x) v = 0.3 * standard_normal(rng);
    for (auto& v : y) v = 0.3 * standard_normal(rng);
    const double exact = gaussian_kernel(x, y, kp);
    const Eigen::VectorXd z = x + y;
    const double scale = std::exp(-x.squaredNorm() - y.squaredNorm());
    // Var of the m = 2 estimate with omega_2 = q omega_1, from E exp(a.w) = exp(|a|^2 / 2).
    auto closed_form = [&](const Eigen::MatrixXd& q) {
      const Eigen::VectorXd s = z + q.transpose() * z;
      return scale * scale / 4.0 * (2.0 * std::exp(2.0 * z.squaredNorm()) + 2.0 * std::exp(0.5 * s.squaredNorm())) -
             exact * exact;
    };
    // Squared errors with omega_1 drawn from the stream `seed`, so two maps
    // evaluated on the same stream form paired samples.
    auto squared_errors = [&](const Eigen::MatrixXd& q, std::uint64_t seed) {
      Rng r(seed);
      std::vector<double> se(trials);
      FrequencyEnsemble ens{Eigen::MatrixXd(2, d), CouplingSpec::of(CouplingKind::iid), seed};
      for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd w(d);
        for (auto& v : w) v = standard_normal(r);
        ens.freqs.row(0) = w.transpose();
        ens.freqs.row(1) = (q * w).transpose();
        const double est = rlf_features(x, ens, kp).dot(rlf_features(y, ens, kp));
        se[t] = (est - exact) * (est - exact);
      }
      return se;
    };
    const Eigen::MatrixXd anti_map = -Eigen::MatrixXd::Identity(d, d);
    const double anti_closed = closed_form(anti_map);
    for (int a = 0; a < alternatives; ++a) {
      // Haar-random orthogonal map: the second frequency stays N(0, I).
      const Eigen::MatrixXd q = sample_orthogonal_directions(d, d, rng);
      const std::uint64_t stream = seed_for(2, p, a);
      const auto anti = squared_errors(anti_map, stream);
      const auto alt = squared_errors(q, stream);
      std::vector<double> diff(trials);
      for (int t = 0; t < trials; ++t) diff[t] = alt[t] - anti[t];
      const MeanSe dm = mean_se(diff);
      const MeanSe alt_var = mean_se(alt);
      worst_z = std::min(worst_z, z_of(dm.mean, dm.se));
      worst_closed = std::min(worst_closed, closed_form(q) - anti_closed);
      worst_fit = std::max(worst_fit, std::abs(alt_var.mean - closed_form(q)) / alt_var.se);
      out.require(dm.mean >= -3.0 * dm.se, "pair " + std::to_string(p) + " alternative " + std::to_string(a));
      ++comparisons;
    }
  }
  out.detail << comparisons << " paired comparisons; smallest (alt - antithetic) / SE = " << worst_z
             << "; closed-form variance gap >= " << worst_closed << "; largest |Monte Carlo - closed form| / SE "
             << worst_fit;
  out.require(worst_closed >= 0.0, "closed-form variance ordering");
}

void criterion_3(Outcome& out) {
  const int d = 8, trials = 1000;
  const Regression data = synthetic_regression(64, d, seed_for(3));
  const GaussianKernelParams kp{data.fit.lengthscale, data.fit.output_scale, 0.0};
  const Eigen::MatrixXd exact = gaussian_kernel_matrix(data.x, data.x, kp);
  out.detail << "fitted lengthscale " << data.fit.lengthscale << ";";
  for (Featurizer f : {Featurizer::rff, Featurizer::rlf}) {
    const int m = default_features(f, d);
    const std::vector<CouplingKind> kinds = {CouplingKind::iid, CouplingKind::halton,
                                             CouplingKind::orthogonal, paired_kind(f)};
    std::vector<MeanSe> res;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      std::vector<double> err(trials);
      for (int t = 0; t < trials; ++t) {
        CouplingSpec spec = CouplingSpec::of(kinds[k]);
        spec.halton_offset = static_cast<std::uint64_t>(t) * m;
        const auto ens = build_ensemble(m, d, spec, seed_for(3, 10 * k + (f == Featurizer::rlf) + 1000 * t));
        err[t] = relative_rmse(gram_estimate(featurize(data.x, ens, kp, f)), exact);
      }
      res.push_back(mean_se(err));
    }
    const double iid = res[0].mean;
    const MeanSe ratio = ratio_of_means(res[3], res[2]);
    out.detail << " " << featurizer_name(f) << " normalized iid 1 halton " << res[1].mean / iid << " orth "
               << res[2].mean / iid << " paired " << res[3].mean / iid << " (ratio " << ratio.mean << " +- "
               << ratio.se << ");";
    out.require(res[0].mean > res[2].mean && res[2].mean > res[3].mean,
                std::string(featurizer_name(f)) + " ordering");
    out.require(ratio.mean + 2.0 * ratio.se < 0.95, std::string(featurizer_name(f)) + " ratio");
  }
}

void criterion_4(Outcome& out) {
  const int d = 8;
  const Regression data = synthetic_regression(64, d, seed_for(3));
  const GaussianKernelParams kp{data.fit.lengthscale, data.fit.output_scale, 0.0};
  const Eigen::MatrixXd exact = gaussian_kernel_matrix(data.x, data.x, kp);
  const double nn = static_cast<double>(exact.size());
  for (Featurizer f : {Featurizer::rff, Featurizer::rlf}) {
    const int m = default_features(f, d);
    std::vector<double> err(4000);
    for (std::size_t t = 0; t < err.size(); ++t) {
      const auto ens = build_ensemble(m, d, CouplingSpec::of(paired_kind(f)), seed_for(4, 1 + (f == Featurizer::rlf), t));
      err[t] = std::sqrt((gram_estimate(featurize(data.x, ens, kp, f)) - exact).squaredNorm() / nn);
    }
    const MeanSe pnc = mean_se(err);

    const CopulaSetup setup{f, 1, f == Featurizer::rlf};
    CopulaTrainConfig cfg;
    cfg.steps = 2000;
    const CopulaFit fit = optimize_copula(data.x, kp, setup, cfg, seed_for(4, 10 + (f == Featurizer::rlf)));
    const auto smooth = smooth_trace(fit.loss_trace, 100);
    const double best = *std::min_element(smooth.begin() + 99, smooth.end());
    Rng eval(seed_for(4, 20 + (f == Featurizer::rlf)));
    const double fresh = copula_loss(fit.params, data.x, kp, setup, 4000, eval);
    out.detail << " " << featurizer_name(f) << ": paired " << pnc.mean << " +- " << pnc.se << ", smoothed start "
               << smooth[99] << " best " << best << " final " << smooth.back() << ", fresh-noise "
               << fresh << " (" << fresh / pnc.mean << "x);";
    out.require(best <= 1.05 * pnc.mean, std::string(featurizer_name(f)) + " smoothed loss");
    out.require(fresh <= 1.05 * pnc.mean, std::string(featurizer_name(f)) + " fresh-noise loss");
  }
}

// Per-entry running moments of a stream of Gram estimates.
class GramMoments {
 public:
  explicit GramMoments(const Eigen::MatrixXd& exact) : exact_(exact), stats_(exact.size()) {}

  void push(const Eigen::MatrixXd& g) {
    for (Eigen::Index k = 0; k < g.size(); ++k) stats_[static_cast<std::size_t>(k)].push(g.reshaped()(k));
  }

  // Largest |mean - exact| / SE over the upper triangle; entries with zero
  // spread must match up to rounding.
  double worst_z() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < exact_.cols(); ++j)
      for (Eigen::Index i = 0; i <= j; ++i) {
        const auto& s = stats_[static_cast<std::size_t>(j * exact_.rows() + i)];
        const double dev = std::abs(s.mean() - exact_(i, j));
        const double se = s.standard_error();
        worst = std::max(worst, se > 0.0 ? dev / se : (dev < 1e-12 ? 0.0 : INFINITY));
      }
    return worst;
  }

 private:
  Eigen::MatrixXd exact_;
  std::vector<RunningStats> stats_;
};

void criterion_5(Outcome& out) {
  // 10x the 10^4 minimum: RLF Gram entries are skewed enough that the z-score
  // is anti-conservative at 10^4.
  const int d = 4, n = 6, draws_per = 100000;
  Rng rng(seed_for(5));
  Eigen::MatrixXd x(n, d);
  for (auto& v : x.reshaped()) v = 0.5 * standard_normal(rng);
  const GaussianKernelParams kp{1.5, 1.0, 0.0};
  const Eigen::MatrixXd exact = gaussian_kernel_matrix(x, x, kp);

  std::vector<double> theta(static_cast<std::size_t>(d * (d - 1) / 2));
  for (auto& t : theta) t = 0.8 * (2.0 * uniform01(rng) - 1.0);
  struct Case {
    Featurizer f;
    CouplingSpec spec;
  };
  const std::vector<Case> cases = {
      {Featurizer::rff, CouplingSpec::of(CouplingKind::iid)},
      {Featurizer::rff, CouplingSpec::of(CouplingKind::orthogonal_pnc)},
      {Featurizer::rff, CouplingSpec::copula(CorrelationParams(d, theta))},
      {Featurizer::rlf, CouplingSpec::of(CouplingKind::iid)},
      {Featurizer::rlf, CouplingSpec::of(CouplingKind::orthogonal_pnc_antithetic)},
  };
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& cs = cases[c];
    const int m = default_features(cs.f, d);
    GramMoments moments(exact);
    for (int t = 0; t < draws_per; ++t)
      moments.push(gram_estimate(featurize(x, build_ensemble(m, d, cs.spec, seed_for(5, c + 1, t)), kp, cs.f)));
    const double z = moments.worst_z();
    out.detail << " " << featurizer_name(cs.f) << "/" << cs.spec.tag() << " max|z| " << z << ";";
    out.require(z <= 3.0, std::string(featurizer_name(cs.f)) + "/" + cs.spec.tag());
  }

  const GraphData g = erdos_renyi_connected(8, 0.4, rng);
  const auto kernel = GraphKernelSpec::regularized_laplacian(1.0, 2);
  const auto f = modulation_for_kernel(kernel);
  const Eigen::MatrixXd exact_g = exact_graph_kernel(g, kernel);
  const double p_halt = 0.3;
  SigmaTrainConfig sc;
  sc.seed = seed_for(5, 50);
  const auto sigma = solve_sigma_coupling(g, p_halt, 8, f, sc);
  for (const auto& coupling : {WalkCoupling::iid(), WalkCoupling::antithetic(), WalkCoupling::coupled(sigma)}) {
    GramMoments moments(exact_g);
    for (int t = 0; t < draws_per; ++t) {
      const auto a = grf_feature_matrix(g, 2, coupling, f, p_halt, seed_for(5, 60, 2 * t));
      const auto b = grf_feature_matrix(g, 2, coupling, f, p_halt, seed_for(5, 60, 2 * t + 1));
      moments.push(grf_gram(a, b));
    }
    const double z = moments.worst_z();
    out.detail << " grf/" << coupling.tag() << " max|z| " << z << ";";
    out.require(z <= 3.0, "grf/" + coupling.tag());
  }
}

void criterion_6(Outcome& out) {
  Rng rng(seed_for(6));
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXd c(7, 7);
    // Alternate continuous costs with small integers, which produce ties.
    for (auto& v : c.reshaped())
      v = t % 2 == 0 ? uniform01(rng) * 10.0 - 5.0 : std::floor(uniform01(rng) * 5.0);
    const Assignment h = hungarian(c);
    const Assignment b = brute_force_assignment(c);
    double h_cost = 0.0;
    for (int i = 0; i < 7; ++i) h_cost += c(i, h.perm[i]);
    if (h.cost == b.cost && h_cost == b.cost) ++agree;
  }
  out.detail << agree << "/100 optimal costs equal brute force exactly";
  out.require(agree == 100, "exact agreement");
}

void criterion_7(Outcome& out) {
  const int trials = 2000;
  const auto kernel = GraphKernelSpec::regularized_laplacian(1.0, 2);
  const auto f = modulation_for_kernel(kernel);
  Rng rng(seed_for(7));
  const GraphData train = erdos_renyi_connected(100, 0.1, rng);
  std::vector<GraphData> held_out;
  for (double pe : {0.08, 0.1, 0.15}) held_out.push_back(erdos_renyi_connected(100, pe, rng));
  std::vector<Eigen::MatrixXd> exact;
  for (const auto& g : held_out) exact.push_back(exact_graph_kernel(g, kernel));

  for (int pi = 1; pi <= 5; ++pi) {
    const double p = 0.1 * pi;
    SigmaTrainConfig sc;
    sc.seed = seed_for(7, pi);
    const auto sigma = solve_sigma_coupling(train, p, 30, f, sc);
    std::vector<double> pooled_iid, pooled_sigma;
    out.detail << " p=" << p << ":";
    for (std::size_t gi = 0; gi < held_out.size(); ++gi) {
      const double norm = exact[gi].norm();
      auto run = [&](const WalkCoupling& c, std::uint64_t tag) {
        std::vector<double> err(trials);
        for (int t = 0; t < trials; ++t) {
          const auto phi = grf_feature_matrix(held_out[gi], 2, c, f, p, seed_for(7, 100 * pi + 10 * gi + tag, t));
          err[t] = (grf_gram(phi) - exact[gi]).norm() / norm;
        }
        return err;
      };
      const auto e_iid = run(WalkCoupling::iid(), 0);
      const auto e_sig = run(WalkCoupling::coupled(sigma), 1);
      const MeanSe a = mean_se(e_iid), b = mean_se(e_sig);
      const double se = difference_se(a, b);
      out.detail << " g" << gi << " iid " << a.mean << " sigma " << b.mean << " (z " << z_of(a.mean - b.mean, se)
                 << ")";
      out.require(b.mean <= a.mean + 2.0 * se, "p=" + std::to_string(p) + " graph " + std::to_string(gi));
      if (pi == 1) {
        out.require(b.mean < a.mean, "strictly lower at p=0.1, graph " + std::to_string(gi));
        pooled_iid.insert(pooled_iid.end(), e_iid.begin(), e_iid.end());
        pooled_sigma.insert(pooled_sigma.end(), e_sig.begin(), e_sig.end());
      }
    }
    if (pi == 1) {
      const MeanSe a = mean_se(pooled_iid), b = mean_se(pooled_sigma);
      const double z = z_of(a.mean - b.mean, difference_se(a, b));
      out.detail << " pooled z " << z;
      out.require(z > 2.0, "pooled improvement at p=0.1 significant at 2 SE");
    }
    out.detail << ";";
  }
}

void criterion_8(Outcome& out) {
  // Identity: features are the transposed Cholesky factor of the joint kernel.
  {
    Rng rng(seed_for(8));
    const int d = 3, nd = 20, np = 10;
    Eigen::MatrixXd x(nd + np, d);
    for (auto& v : x.reshaped()) v = 2.0 * standard_normal(rng);
    Eigen::VectorXd y(nd);
    for (auto& v : y) v = standard_normal(rng);
    const GaussianKernelParams kp{1.0, 1.3, 0.2};
    const Eigen::MatrixXd kall = gaussian_kernel_matrix(x, x, kp);
    const Eigen::MatrixXd lt = Eigen::LLT<Eigen::MatrixXd>(kall).matrixU();
    const auto approx = approx_posterior(lt.leftCols(nd), lt.rightCols(np), y, kp.noise_scale);
    const auto exact = exact_posterior(kall.topLeftCorner(nd, nd), kall.bottomLeftCorner(np, nd),
                                       kall.bottomRightCorner(np, np), y, kp.noise_scale);
    const double dm = (approx.mean - exact.mean).cwiseAbs().maxCoeff();
    const double dc = (approx.cov - exact.cov).cwiseAbs().maxCoeff();
    out.detail << "identity max|dmean| " << dm << " max|dcov| " << dc << ";";
    out.require(dm <= 1e-8 && dc <= 1e-8, "identity to 1e-8");
  }
  // KL(approx || exact) median over seeds for growing m.
  const int d = 8, seeds = 100;
  std::vector<std::vector<double>> kl(3);
  for (int s = 0; s < seeds; ++s) {
    const Regression data = synthetic_regression(96, d, seed_for(8, 1, s), false);
    const Eigen::MatrixXd xd = data.x.topRows(64), xp = data.x.bottomRows(32);
    const Eigen::VectorXd yd = data.y.head(64);
    const auto& kp = data.fit;
    const auto exact = exact_posterior(gaussian_kernel_matrix(xd, xd, kp), gaussian_kernel_matrix(xp, xd, kp),
                                       gaussian_kernel_matrix(xp, xp, kp), yd, kp.noise_scale);
    for (int i = 0; i < 3; ++i) {
      const int m = d << (2 * i);
      const auto ens = build_ensemble(m, d, CouplingSpec::of(CouplingKind::orthogonal), seed_for(8, 2 + i, s));
      const auto approx = approx_posterior(featurize(xd, ens, kp, Featurizer::rff),
                                           featurize(xp, ens, kp, Featurizer::rff), yd, kp.noise_scale);
      kl[i].push_back(gaussian_kl(approx, exact, true));
    }
  }
  std::vector<double> med;
  for (auto& v : kl) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    med.push_back(v[v.size() / 2]);
  }
  out.detail << " median KL per datapoint m=d " << med[0] << ", 4d " << med[1] << ", 16d " << med[2];
  out.require(med[0] >= med[1] && med[1] >= med[2], "nonincreasing median KL");
}

void criterion_9(Outcome& out) {
  const int d = 8, splits = 20, ensembles = 20, ntrain = 128, ntest = 64;
  const Regression data = synthetic_regression(ntrain + ntest, d, seed_for(9), false);
  std::vector<double> diff, kl_pnc, kl_orth;
  for (int s = 0; s < splits; ++s) {
    Rng rng(seed_for(9, 1, s));
    std::vector<int> idx(ntrain + ntest);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::MatrixXd xd(ntrain, d), xp(ntest, d);
    Eigen::VectorXd yd(ntrain);
    for (int i = 0; i < ntrain; ++i) {
      xd.row(i) = data.x.row(idx[i]);
      yd(i) = data.y(idx[i]);
    }
    for (int i = 0; i < ntest; ++i) xp.row(i) = data.x.row(idx[ntrain + i]);
    GpFitConfig cfg;
    cfg.steps = 300;
    cfg.lr = 0.05;
    const auto kp = fit_hyperparams(xd, yd, {1.0, 1.0, 0.5}, cfg);
    const auto exact = exact_posterior(gaussian_kernel_matrix(xd, xd, kp), gaussian_kernel_matrix(xp, xd, kp),
                                       gaussian_kernel_matrix(xp, xp, kp), yd, kp.noise_scale);
    auto mean_kl = [&](CouplingKind kind, std::uint64_t tag) {
      double acc = 0.0;
      for (int e = 0; e < ensembles; ++e) {
        const auto ens = build_ensemble(d, d, CouplingSpec::of(kind), seed_for(9, tag, 100 * s + e));
        const auto approx = approx_posterior(featurize(xd, ens, kp, Featurizer::rff),
                                             featurize(xp, ens, kp, Featurizer::rff), yd, kp.noise_scale);
        acc += gaussian_kl(approx, exact, true);
      }
      return acc / ensembles;
    };
    kl_pnc.push_back(mean_kl(CouplingKind::orthogonal_pnc, 2));
    kl_orth.push_back(mean_kl(CouplingKind::orthogonal, 3));
    diff.push_back(kl_pnc.back() - kl_orth.back());
  }
  const MeanSe dm = mean_se(diff);
  out.detail << "KL per datapoint: paired " << mean_se(kl_pnc).mean << ", orthogonal " << mean_se(kl_orth).mean
             << "; paired split difference " << dm.mean << " +- " << dm.se << " (z " << z_of(dm.mean, dm.se) << ")";
  out.require(std::abs(dm.mean) <= 2.0 * dm.se, "no significant change at 2 SE");
}

void criterion_10(Outcome& out) {
  const int n = 16, d = 16;
  Rng rng(seed_for(10));
  Eigen::MatrixXd tokens(n, d);
  for (auto& v : tokens.reshaped()) v = 0.15 * standard_normal(rng);
  std::vector<AttentionStats> st;
  const std::vector<CouplingKind> kinds = {CouplingKind::orthogonal, CouplingKind::orthogonal_pnc,
                                           CouplingKind::positive_monotone};
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    AttentionConfig cfg;
    cfg.num_features = d;
    cfg.coupling = CouplingSpec::of(kinds[k]);
    cfg.trials = 2000;
    cfg.seed = seed_for(10, k + 1);
    cfg.direction_averaged = false;
    st.push_back(attention_estimate(tokens, cfg));
  }
  const MeanSe dv = pnc_variance_difference(tokens, d, 20000, seed_for(10, 9));
  const auto &orth = st[0].attention_mse, &pnc = st[1].attention_mse, &pm = st[2].attention_mse;
  const double z_pnc = z_of(pnc.mean - orth.mean, difference_se(pnc, orth));
  const double z_pm = z_of(orth.mean - pm.mean, difference_se(orth, pm));
  out.detail << "kernel variance orth " << st[0].kernel_variance << ", paired minus orth " << dv.mean << " +- "
             << dv.se << " (z " << z_of(-dv.mean, dv.se) << "); attention MSE orth " << orth.mean << ", paired "
             << pnc.mean << " (z " << z_pnc << "), positive-monotone " << pm.mean << " (improvement z " << z_pm
             << ")";
  out.require(-dv.mean > 3.0 * dv.se, "kernel variance reduction at 3 SE");
  out.require(std::abs(z_pnc) <= 2.0, "paired attention MSE within 2 SE");
  out.require(z_pm > 2.0, "positive-monotone attention MSE reduction at 2 SE");
}

void criterion_11(Outcome& out) {
  Rng rng(seed_for(11));
  // Unit sum and unbiasedness on a small graph.
  {
    const GraphData g = erdos_renyi_connected(20, 0.2, rng);
    const double p = 0.3;
    const Eigen::VectorXd exact = exact_pagerank(g, p);
    PageRankSigmaConfig pc;
    pc.seed = seed_for(11, 1);
    const auto sigma = solve_pagerank_sigma(g, p, 10, pc);
    int bad_sums = 0;
    double worst = 0.0;
    for (const auto& c : {WalkCoupling::iid(), WalkCoupling::antithetic(), WalkCoupling::coupled(sigma)}) {
      std::vector<RunningStats> node(20);
      for (int t = 0; t < 10000; ++t) {
        const auto est = mc_pagerank(g, p, 2, c, seed_for(11, 2, t));
        const std::int64_t total = std::accumulate(est.counts.begin(), est.counts.end(), std::int64_t{0});
        if (total != est.walks) ++bad_sums;
        for (int i = 0; i < 20; ++i) node[i].push(est.rho(i));
      }
      double z = 0.0;
      for (int i = 0; i < 20; ++i) z = std::max(z, std::abs(node[i].mean() - exact(i)) / node[i].standard_error());
      worst = std::max(worst, z);
      out.detail << " " << c.tag() << " max|z| " << z << ";";
      out.require(z <= 3.0, "unbiased " + c.tag());
    }
    out.detail << " count sums off in " << bad_sums << " of 30000 samples;";
    out.require(bad_sums == 0, "exact unit sum");
  }
  // Coupling transfer.
  const GraphData train = erdos_renyi_connected(100, 0.1, rng);
  const std::vector<GraphData> tests = {erdos_renyi_connected(100, 0.05, rng), erdos_renyi_connected(200, 0.05, rng)};
  for (int pi = 1; pi <= 5; ++pi) {
    const double p = 0.1 * pi;
    PageRankSigmaConfig pc;
    pc.seed = seed_for(11, 10 + pi);
    const auto sigma = solve_pagerank_sigma(train, p, 10, pc);
    out.detail << " p=" << p << ":";
    for (std::size_t gi = 0; gi < tests.size(); ++gi) {
      const Eigen::VectorXd exact = exact_pagerank(tests[gi], p);
      auto run = [&](const WalkCoupling& c, std::uint64_t tag) {
        std::vector<double> err(1000);
        for (std::size_t t = 0; t < err.size(); ++t)
          err[t] = (mc_pagerank(tests[gi], p, 2, c, seed_for(11, 100 * pi + 10 * gi + tag, t)).rho - exact).norm() /
                   exact.norm();
        return mean_se(err);
      };
      const MeanSe a = run(WalkCoupling::iid(), 0), b = run(WalkCoupling::coupled(sigma), 1);
      const double se = difference_se(a, b);
      out.detail << " g" << gi << " iid " << a.mean << " sigma " << b.mean << " (z " << z_of(a.mean - b.mean, se) << ")";
      out.require(b.mean <= a.mean + 2.0 * se, "p=" + std::to_string(p) + " graph " + std::to_string(gi));
    }
    out.detail << ";";
  }
}

void criterion_12(Outcome& out) {
  // JLT on the squared norms of u + v and u - v.
  {
    const int n = 30, dim = 200, trials = 1000;
    const double eps = 0.2;
    const int r = jlt_dimension(n, eps);
    Rng rng(seed_for(12));
    Eigen::MatrixXd vecs(dim, n);
    for (auto& v : vecs.reshaped()) v = standard_normal(rng);
    int kept = 0, kept_all = 0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::MatrixXd red = jlt_reduce(vecs, r, rng);
      auto ratio = [&](int i, int j, double sign) {
        return (red.col(i) + sign * red.col(j)).squaredNorm() / (vecs.col(i) + sign * vecs.col(j)).squaredNorm();
      };
      auto within = [eps](double x) { return x >= 1.0 - eps && x <= 1.0 + eps; };
      std::uniform_int_distribution<int> pick(0, n - 1);
      int i = pick(rng), j = pick(rng);
      while (j == i) j = pick(rng);
      kept += within(ratio(i, j, 1.0)) && within(ratio(i, j, -1.0));
      bool all = true;
      for (int a = 0; a < n && all; ++a)
        for (int b = a + 1; b < n && all; ++b) all = within(ratio(a, b, 1.0)) && within(ratio(a, b, -1.0));
      kept_all += all;
    }
    out.detail << "JLT r=" << r << ": random pair preserved in " << kept << "/" << trials
               << " trials (all " << n * (n - 1) / 2 << " pairs at once: " << kept_all << ");";
    out.require(kept >= 950, "JLT 95%");
  }
  // Random-projection quadratic matching against exhaustive search over 5!.
  {
    const auto f = modulation_for_kernel(GraphKernelSpec::regularized_laplacian(1.0, 2));
    auto exhaustive = [](const Eigen::MatrixXd& v) {
      std::vector<int> perm(5);
      std::iota(perm.begin(), perm.end(), 0);
      double best = INFINITY;
      do best = std::min(best, quadratic_matching_objective(v, perm));
      while (std::next_permutation(perm.begin(), perm.end()));
      return best;
    };
    int hits = 0, gaussian_hits = 0;
    for (int s = 0; s < 100; ++s) {
      Rng rng(seed_for(12, 1, s));
      const GraphData g = erdos_renyi_connected(30, 0.2, rng);
      const double p = 0.1 * (1 + s % 5);
      const auto qp = estimate_quantile_projections(g, 5, p, f, 50, seed_for(12, 2, s));
      std::uniform_int_distribution<int> pick(0, 29);
      const Eigen::MatrixXd v = qp.per_node[static_cast<std::size_t>(pick(rng))];
      hits += quadratic_matching_random_projection(v, 50, rng).cost <= exhaustive(v) * (1.0 + 1e-9);
      Eigen::MatrixXd w(5, 30);
      for (auto& x : w.reshaped()) x = standard_normal(rng);
      gaussian_hits += quadratic_matching_random_projection(w, 50, rng).cost <= exhaustive(w) * (1.0 + 1e-9);
    }
    out.detail << " quadratic solver k=50 optimal on " << hits
               << "/100 walk-projection instances (unstructured Gaussian instances: " << gaussian_hits << "/100)";
    out.require(hits >= 90, "quadratic solver 90%");
  }
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "discrete OT oracle: reversal minimizes pair cost", 5, criterion_1},
      {2, "antithetic RLF variance minimal at m=2", 60, criterion_2},
      {3, "Gram RMSE ordering iid > orthogonal > paired", 600, criterion_3},
      {4, "copula recovers paired-norm loss", 900, criterion_4},
      {5, "unbiased Gram estimates (RFF, RLF, GRF)", 600, criterion_5},
      {6, "Hungarian equals brute force", 10, criterion_6},
      {7, "sigma-coupled GRFs vs iid on held-out graphs", 1800, criterion_7},
      {8, "GP posterior identity and KL decay in m", 300, criterion_8},
      {9, "paired norms leave GP KL unchanged", 600, criterion_9},
      {10, "attention kernel variance and MSE", 600, criterion_10},
      {11, "PageRank unit sum, unbiasedness, sigma transfer", 900, criterion_11},
      {12, "JLT preservation and quadratic matching", 600, criterion_12},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(secs <= c.limit_seconds, "runtime limit " + std::to_string(c.limit_seconds) + " s");
    std::printf("criterion %2d %s  %s (%.1f s):%s\n", c.id, out.pass ? "PASS" : "FAIL", c.title, secs,
                out.detail.str().c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}

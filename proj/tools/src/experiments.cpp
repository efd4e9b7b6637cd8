#include "otrf_cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "otrf/attention.hpp"
#include "otrf/copula.hpp"
#include "otrf/error.hpp"
#include "otrf/eucrf.hpp"
#include "otrf/gp.hpp"
#include "otrf/graph.hpp"
#include "otrf/grf.hpp"
#include "otrf/matching.hpp"
#include "otrf/pagerank.hpp"
#include "otrf/parallel.hpp"
#include "otrf/stats.hpp"
#include "otrf_cli/ingest.hpp"

namespace otrf::cli {

namespace {

// Stream layout under the master seed.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kTrainStream = 3;
constexpr std::uint64_t kSplitStream = 4;
constexpr std::uint64_t kGroupStream = 1000;

std::uint64_t trial_seed(std::uint64_t seed, std::size_t group, std::size_t trial) {
  return stream_seed(seed, kGroupStream + group, trial);
}

int positive(int value, const std::string& key) {
  if (value < 1) throw InvalidRequest(key + " must be positive, got " + std::to_string(value));
  return value;
}

std::vector<double> probabilities(std::vector<double> ps, const std::string& key) {
  for (double p : ps)
    if (!(p > 0.0 && p < 1.0)) throw InvalidRequest(key + " entries must lie in (0, 1)");
  return ps;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidRequest("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidRequest(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------- data

struct DataSettings {
  std::string path;
  std::string target;
  int n = 64;
  int d = 8;
  double lengthscale = 4.0;
  double noise = 0.1;

  void read(Config& cfg, int default_n) {
    path = cfg.get_string("data.path", "");
    if (!path.empty()) {
      target = cfg.get_string("data.target", "");
      return;
    }
    n = positive(cfg.get_int("data.n", default_n), "data.n");
    d = positive(cfg.get_int("data.d", 8), "data.d");
    lengthscale = cfg.get_double("data.lengthscale", 4.0);
    noise = cfg.get_double("data.noise", 0.1);
  }

  Dataset raw(Rng& rng) const {
    if (!path.empty()) return ingest_csv(path, target);
    return synthetic_regression(n, d, lengthscale, noise, rng);
  }
};

// "fit", "heuristic" or a number.
struct LengthscaleSetting {
  std::string mode = "fit";
  double value = 0.0;
  int fit_steps = 1000;
  double fit_lr = 0.02;

  void read(Config& cfg, const std::string& section) {
    mode = cfg.get_string(section + ".lengthscale", "fit");
    if (mode == "fit") {
      fit_steps = positive(cfg.get_int(section + ".fit_steps", 1000), section + ".fit_steps");
      fit_lr = cfg.get_double(section + ".fit_lr", 0.02);
    } else if (mode != "heuristic") {
      value = parse_double(mode, section + ".lengthscale");
      if (!(value > 0.0)) throw InvalidRequest(section + ".lengthscale must be positive");
      mode = "value";
    }
  }

  GaussianKernelParams resolve(const Dataset& data) const {
    if (mode == "heuristic") return {rlf_lengthscale_heuristic(data.x), 1.0, 0.0};
    if (mode == "value") return {value, 1.0, 0.0};
    GpFitConfig fc;
    fc.steps = fit_steps;
    fc.lr = fit_lr;
    const GaussianKernelParams fit = fit_hyperparams(data.x, data.y, {1.0, 1.0, 0.5}, fc);
    return {fit.lengthscale, fit.output_scale, 0.0};
  }
};

// Feature-count grid; 0 stands for the featurizer's natural block (d for RFF, 2d for RLF).
std::vector<int> read_feature_grid(Config& cfg, const std::string& key) {
  std::vector<int> grid;
  for (const auto& item : cfg.get_strings(key, {"auto"}))
    grid.push_back(item == "auto" ? 0 : positive(static_cast<int>(parse_int(item, key)), key));
  return grid;
}

int resolve_features(int m, Featurizer f, int d, const std::vector<CouplingSpec>& couplings) {
  if (m > 0) return m;
  int block = f == Featurizer::rlf ? 2 * d : d;
  for (const auto& c : couplings)
    if (c.orthogonal_blocks()) block = std::max(block, c.block_size(d));
  return block;
}

// Fails before any trial runs when a grid entry cannot hold whole orthogonal blocks.
void check_blocks(int m, int d, const std::vector<CouplingSpec>& couplings) {
  for (const auto& c : couplings) {
    if (c.kind == CouplingKind::copula && c.correlation->size() != d)
      throw InvalidRequest("copula parameters couple " + std::to_string(c.correlation->size()) +
                           " norms but the data has dimension " + std::to_string(d));
    if (c.orthogonal_blocks() && m % c.block_size(d) != 0)
      throw InvalidRequest("m=" + std::to_string(m) + " is not a multiple of the block size " +
                           std::to_string(c.block_size(d)) + " of coupling " + c.tag() + " in dimension " +
                           std::to_string(d));
  }
}

CouplingSpec load_copula_spec(const std::string& path) {
  const json doc = load_json(path);
  if (!doc.contains("theta")) throw InvalidRequest(path + ": missing theta");
  return CouplingSpec::copula(correlation_from_json(doc["theta"]), doc.value("antithetic", false));
}

std::vector<CouplingSpec> read_euclidean_couplings(Config& cfg, const std::string& section,
                                                   const std::vector<std::string>& fallback) {
  std::vector<CouplingSpec> specs;
  std::string copula_path;
  const auto tags = cfg.get_strings(section + ".couplings", fallback);
  for (const auto& tag : tags) {
    if (tag == "copula") {
      if (copula_path.empty()) copula_path = cfg.get_string(section + ".copula_file", "");
      if (copula_path.empty())
        throw InvalidRequest("coupling 'copula' needs " + section + ".copula_file (from copula-train)");
      specs.push_back(load_copula_spec(copula_path));
      continue;
    }
    try {
      specs.push_back(CouplingSpec::of(parse_coupling_kind(tag)));
    } catch (const InvalidRequest&) {
      throw InvalidRequest(section + ".couplings: unknown coupling '" + tag + "'");
    }
  }
  return specs;
}

std::string baseline_of(const std::vector<CouplingSpec>& couplings) {
  for (const auto& c : couplings)
    if (c.kind == CouplingKind::iid) return c.tag();
  return couplings.front().tag();
}

std::string baseline_of(const std::vector<std::string>& tags) {
  return std::find(tags.begin(), tags.end(), "iid") != tags.end() ? "iid" : tags.front();
}

// ---------------------------------------------------------------- graphs

struct GraphSettings {
  std::string path;
  int nodes = 100;
  double edge_prob = 0.1;

  void read(Config& cfg) {
    path = cfg.get_string("graph.path", "");
    if (!path.empty()) return;
    nodes = positive(cfg.get_int("graph.nodes", 100), "graph.nodes");
    edge_prob = cfg.get_double("graph.edge_prob", 0.1);
    if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw InvalidRequest("graph.edge_prob must lie in (0, 1]");
  }

  GraphData load(std::uint64_t seed) const {
    if (!path.empty()) return ingest_graph(path);
    Rng rng = make_stream(seed, kDataStream);
    return erdos_renyi_connected(nodes, edge_prob, rng);
  }
};

GraphKernelSpec read_graph_kernel(Config& cfg) {
  const std::string family = cfg.get_string("kernel.family", "regularized_laplacian");
  const double sigma = cfg.get_double("kernel.sigma", 1.0);
  const double alpha = cfg.get_double("kernel.alpha", 2.0);
  const int degree = cfg.get_int("kernel.degree", 2);
  GraphKernelSpec spec = parse_graph_kernel(family, sigma, alpha, degree);
  spec.validate();
  return spec;
}

struct WalkCouplingRequest {
  std::string tag;
  bool sigma = false;
};

std::vector<WalkCouplingRequest> read_walk_couplings(Config& cfg, const std::string& section) {
  std::vector<WalkCouplingRequest> out;
  for (const auto& tag : cfg.get_strings(section + ".couplings", {"iid", "antithetic", "sigma"})) {
    if (tag != "iid" && tag != "antithetic" && tag != "sigma")
      throw InvalidRequest(section + ".couplings: unknown walk coupling '" + tag +
                           "' (expected iid, antithetic or sigma)");
    out.push_back({tag, tag == "sigma"});
  }
  return out;
}

WalkCoupling make_walk_coupling(const std::string& tag, const std::optional<SigmaCoupling>& sigma) {
  if (tag == "iid") return WalkCoupling::iid();
  if (tag == "antithetic") return WalkCoupling::antithetic();
  return WalkCoupling::coupled(*sigma);
}

// Learned permutations either come from a sigma-train artifact or are trained in-run.
struct SigmaSource {
  std::string file;
  int order = 30;
  json loaded;

  void read(Config& cfg, const std::string& section, int default_order) {
    file = cfg.get_string(section + ".sigma_file", "");
    if (file.empty()) order = positive(cfg.get_int(section + ".sigma_order", default_order), section + ".sigma_order");
  }

  bool from_file() const { return !file.empty(); }

  SigmaCoupling lookup(double p_halt) {
    if (loaded.is_null()) {
      loaded = load_json(file);
      if (!loaded.contains("couplings") || !loaded["couplings"].is_array())
        throw InvalidRequest(file + ": expected a \"couplings\" array");
    }
    for (const auto& entry : loaded["couplings"])
      if (std::abs(entry.at("p_halt").get<double>() - p_halt) < 1e-12) return sigma_from_json(entry);
    throw InvalidRequest(file + ": no permutation for p_halt " + num(p_halt));
  }
};

json sigma_entry_json(const SigmaCoupling& s) {
  std::vector<int> one_based;
  for (int v : s.permutation()) one_based.push_back(v + 1);
  return one_based;
}

// ---------------------------------------------------------------- rf-bench

RunResult rf_bench(Config& cfg, const RunContext& ctx) {
  DataSettings data_settings;
  data_settings.read(cfg, 64);
  const auto featurizers = cfg.get_strings("rf.featurizers", {"rff", "rlf"});
  const auto coupling_tags =
      cfg.get_strings("rf.couplings", {"iid", "halton", "orthogonal", "orthogonal_pnc",
                                       "orthogonal_pnc_antithetic"});
  const auto couplings = read_euclidean_couplings(cfg, "rf", coupling_tags);
  const auto grid = read_feature_grid(cfg, "rf.features");
  LengthscaleSetting ls;
  ls.read(cfg, "rf");
  const int trials = positive(cfg.get_int("rf.trials", 1000), "rf.trials");
  std::vector<Featurizer> fs;
  for (const auto& name : featurizers) fs.push_back(parse_featurizer(name));
  cfg.check_all_used();

  Rng data_rng = make_stream(ctx.seed, kDataStream);
  const Dataset data = cap_and_standardize(data_settings.raw(data_rng), kMaxSplitPoints, data_rng);
  const GaussianKernelParams kp = ls.resolve(data);
  const Eigen::MatrixXd exact = gaussian_kernel_matrix(data.x, data.x, kp);
  const int d = static_cast<int>(data.x.cols());

  RunResult out;
  out.trials = TrialTable({"featurizer", "coupling", "m", "trial", "rmse", "seed"});
  json groups = json::array();
  for (Featurizer f : fs)
    for (int m_setting : grid) check_blocks(resolve_features(m_setting, f, d, couplings), d, couplings);
  std::size_t group = 0;
  for (Featurizer f : fs) {
    for (int m_setting : grid) {
      const int m = resolve_features(m_setting, f, d, couplings);
      for (std::size_t c = 0; c < couplings.size(); ++c, ++group) {
        std::vector<double> err(static_cast<std::size_t>(trials));
        parallel_for(err.size(), ctx.threads, [&](std::size_t t) {
          CouplingSpec spec = couplings[c];
          spec.halton_offset = static_cast<std::uint64_t>(t) * m;
          const auto ens = build_ensemble(m, d, spec, trial_seed(ctx.seed, group, t));
          err[t] = relative_rmse(gram_estimate(featurize(data.x, ens, kp, f)), exact);
        });
        const std::string tag = couplings[c].tag();
        for (std::size_t t = 0; t < err.size(); ++t)
          out.trials.add({featurizer_name(f), tag, num(m), num(static_cast<std::int64_t>(t)), num(err[t]),
                          num(ctx.seed)});
        groups.push_back(summary_entry({{"featurizer", featurizer_name(f)}, {"coupling", tag}, {"m", m}},
                                       mean_se(err), err.size()));
      }
    }
  }
  std::vector<std::string> tags;
  for (const auto& c : couplings) tags.push_back(c.tag());
  add_normalized(groups, baseline_of(tags), {"featurizer", "m"});
  out.summary["metric"] = "gram_rmse";
  out.summary["baseline"] = baseline_of(tags);
  out.summary["lengthscale"] = kp.lengthscale;
  out.summary["output_scale"] = kp.output_scale;
  out.summary["points"] = data.x.rows();
  out.summary["dim"] = d;
  out.summary["groups"] = std::move(groups);
  return out;
}

// ---------------------------------------------------------------- copula-train

RunResult copula_train(Config& cfg, const RunContext& ctx) {
  DataSettings data_settings;
  data_settings.read(cfg, 64);
  const Featurizer f = parse_featurizer(cfg.get_string("copula.featurizer", "rff"));
  LengthscaleSetting ls;
  ls.read(cfg, "copula");
  CopulaSetup setup;
  setup.featurizer = f;
  setup.blocks = positive(cfg.get_int("copula.blocks", 1), "copula.blocks");
  setup.antithetic = cfg.get_bool("copula.antithetic", f == Featurizer::rlf);
  CopulaTrainConfig tc;
  tc.steps = positive(cfg.get_int("copula.steps", 2000), "copula.steps");
  tc.mc_samples = positive(cfg.get_int("copula.mc_samples", 8), "copula.mc_samples");
  tc.lr = cfg.get_double("copula.lr", 1e-2);
  tc.init = cfg.get_double("copula.init", 1e-3);
  const int window = positive(cfg.get_int("copula.smoothing", 100), "copula.smoothing");
  const int eval_samples = positive(cfg.get_int("copula.eval_samples", 2000), "copula.eval_samples");
  cfg.check_all_used();

  Rng data_rng = make_stream(ctx.seed, kDataStream);
  const Dataset data = cap_and_standardize(data_settings.raw(data_rng), kMaxSplitPoints, data_rng);
  const GaussianKernelParams kp = ls.resolve(data);
  const Eigen::MatrixXd exact = gaussian_kernel_matrix(data.x, data.x, kp);
  const int d = static_cast<int>(data.x.cols());
  const int m = setup.blocks * d * (setup.antithetic ? 2 : 1);

  const CopulaFit fit = optimize_copula(data.x, kp, setup, tc, stream_seed(ctx.seed, kTrainStream));
  const std::vector<double> smoothed = smooth_trace(fit.loss_trace, window);

  RunResult out;
  out.trials = TrialTable({"step", "loss", "smoothed", "seed"});
  for (std::size_t s = 0; s < fit.loss_trace.size(); ++s)
    out.trials.add({num(static_cast<std::int64_t>(s)), num(fit.loss_trace[s]), num(smoothed[s]), num(ctx.seed)});

  // Fresh-noise evaluation of the learned coupling against the hand-designed ones.
  const CouplingSpec paired = CouplingSpec::of(setup.antithetic ? CouplingKind::orthogonal_pnc_antithetic
                                                                : CouplingKind::orthogonal_pnc);
  const std::vector<std::pair<std::string, CouplingSpec>> compare = {
      {"orthogonal", CouplingSpec::of(CouplingKind::orthogonal)},
      {paired.tag(), paired},
      {CouplingSpec::copula(fit.params, setup.antithetic).tag(), CouplingSpec::copula(fit.params, setup.antithetic)},
  };
  json groups = json::array();
  for (std::size_t c = 0; c < compare.size(); ++c) {
    std::vector<double> err(static_cast<std::size_t>(eval_samples));
    parallel_for(err.size(), ctx.threads, [&](std::size_t t) {
      const auto ens = build_ensemble(m, d, compare[c].second, trial_seed(ctx.seed, c, t));
      err[t] = relative_rmse(gram_estimate(featurize(data.x, ens, kp, f)), exact);
    });
    groups.push_back(summary_entry({{"coupling", compare[c].first}, {"m", m}}, mean_se(err), err.size()));
  }
  add_normalized(groups, paired.tag(), {"m"});

  const double best = smoothed.empty() ? 0.0 : *std::min_element(smoothed.begin(), smoothed.end());
  out.summary["metric"] = "gram_rmse";
  out.summary["featurizer"] = featurizer_name(f);
  out.summary["baseline"] = paired.tag();
  out.summary["lengthscale"] = kp.lengthscale;
  out.summary["steps"] = tc.steps;
  out.summary["best_smoothed_loss"] = best;
  out.summary["final_smoothed_loss"] = smoothed.empty() ? 0.0 : smoothed.back();
  out.summary["groups"] = std::move(groups);

  json artifact = {{"featurizer", featurizer_name(f)},
                   {"d", d},
                   {"m", m},
                   {"blocks", setup.blocks},
                   {"antithetic", setup.antithetic},
                   {"lengthscale", kp.lengthscale},
                   {"seed", ctx.seed},
                   {"theta", correlation_to_json(fit.params)}};
  require_finite(artifact, "copula.json");
  out.artifacts.emplace_back("copula.json", artifact.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------- grf-bench

RunResult grf_bench(Config& cfg, const RunContext& ctx) {
  GraphSettings gs;
  gs.read(cfg);
  const GraphKernelSpec kspec = read_graph_kernel(cfg);
  const auto p_grid = probabilities(cfg.get_doubles("grf.p_halt", {0.1, 0.2, 0.3, 0.4, 0.5}), "grf.p_halt");
  const int walkers = positive(cfg.get_int("grf.walkers", 2), "grf.walkers");
  const auto couplings = read_walk_couplings(cfg, "grf");
  const bool need_sigma = std::any_of(couplings.begin(), couplings.end(), [](auto& c) { return c.sigma; });
  SigmaSource source;
  SigmaTrainConfig st;
  if (need_sigma) {
    source.read(cfg, "grf", 30);
    if (!source.from_file()) {
      st.walks_per_quantile = positive(cfg.get_int("grf.walks_per_quantile", 100), "grf.walks_per_quantile");
      st.max_pairs = static_cast<std::size_t>(positive(cfg.get_int("grf.max_pairs", 2000), "grf.max_pairs"));
    }
  }
  const int trials = positive(cfg.get_int("grf.trials", 200), "grf.trials");
  const int k_max = positive(cfg.get_int("grf.max_order", kDefaultModulationOrder), "grf.max_order");
  cfg.check_all_used();

  const GraphData g = gs.load(ctx.seed);
  const Eigen::MatrixXd exact = exact_graph_kernel(g, kspec);
  const double exact_norm = exact.norm();
  const ModulationFn f = modulation_for_kernel(kspec, k_max);
  reset_grf_truncation_warnings();

  RunResult out;
  out.trials = TrialTable({"p_halt", "coupling", "m", "trial", "frobenius_error", "seed"});
  json groups = json::array();
  json sigmas = json::array();
  std::size_t group = 0;
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    const double p = p_grid[pi];
    std::optional<SigmaCoupling> sigma;
    if (need_sigma) {
      if (source.from_file()) {
        sigma = source.lookup(p);
      } else {
        st.seed = stream_seed(ctx.seed, kTrainStream, pi);
        st.threads = ctx.threads;
        sigma = solve_sigma_coupling(g, p, source.order, f, st);
      }
      sigmas.push_back({{"p_halt", p}, {"n", sigma->order()}, {"sigma", sigma_entry_json(*sigma)}});
    }
    for (const auto& c : couplings) {
      const WalkCoupling wc = make_walk_coupling(c.tag, sigma);
      std::vector<double> err(static_cast<std::size_t>(trials));
      parallel_for(err.size(), ctx.threads, [&](std::size_t t) {
        const Eigen::MatrixXd phi = grf_feature_matrix(g, walkers, wc, f, p, trial_seed(ctx.seed, group, t));
        err[t] = (grf_gram(phi) - exact).norm() / exact_norm;
      });
      for (std::size_t t = 0; t < err.size(); ++t)
        out.trials.add({num(p), c.tag, num(walkers), num(static_cast<std::int64_t>(t)), num(err[t]), num(ctx.seed)});
      groups.push_back(summary_entry({{"p_halt", p}, {"coupling", c.tag}, {"m", walkers}}, mean_se(err), err.size()));
      ++group;
    }
  }
  std::vector<std::string> tags;
  for (const auto& c : couplings) tags.push_back(c.tag);
  add_normalized(groups, baseline_of(tags), {"p_halt", "m"});
  out.summary["metric"] = "relative_frobenius_error";
  out.summary["baseline"] = baseline_of(tags);
  out.summary["kernel"] = kspec.tag();
  out.summary["nodes"] = g.size();
  out.summary["groups"] = std::move(groups);
  if (need_sigma) out.summary["sigma"] = std::move(sigmas);
  out.summary["truncation_warnings"] = grf_truncation_warnings();
  return out;
}

// ---------------------------------------------------------------- sigma-train

RunResult sigma_train(Config& cfg, const RunContext& ctx) {
  GraphSettings gs;
  gs.read(cfg);
  const std::string target = cfg.get_string("sigma.target", "grf");
  if (target != "grf" && target != "pagerank")
    throw InvalidRequest("sigma.target must be grf or pagerank, got '" + target + "'");
  const bool grf = target == "grf";
  std::optional<GraphKernelSpec> kspec;
  int k_max = kDefaultModulationOrder;
  if (grf) {
    kspec = read_graph_kernel(cfg);
    k_max = positive(cfg.get_int("sigma.max_order", kDefaultModulationOrder), "sigma.max_order");
  }
  const auto p_grid = probabilities(cfg.get_doubles("sigma.p_halt", {0.1, 0.2, 0.3, 0.4, 0.5}), "sigma.p_halt");
  const int order = positive(cfg.get_int("sigma.order", grf ? 30 : 10), "sigma.order");
  SigmaTrainConfig st;
  PageRankSigmaConfig pc;
  if (grf) {
    st.walks_per_quantile = positive(cfg.get_int("sigma.walks_per_quantile", 100), "sigma.walks_per_quantile");
    st.max_pairs = static_cast<std::size_t>(positive(cfg.get_int("sigma.max_pairs", 2000), "sigma.max_pairs"));
  } else {
    pc.samples_per_quantile =
        positive(cfg.get_int("sigma.samples_per_quantile", 200), "sigma.samples_per_quantile");
  }
  cfg.check_all_used();

  const GraphData g = gs.load(ctx.seed);
  std::optional<ModulationFn> f;
  if (grf) f = modulation_for_kernel(*kspec, k_max);

  RunResult out;
  out.trials = TrialTable({"target", "p_halt", "n", "q", "sigma_q", "seed"});
  json entries = json::array();
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    const double p = p_grid[pi];
    const std::uint64_t seed = stream_seed(ctx.seed, kTrainStream, pi);
    SigmaCoupling sigma = SigmaCoupling::identity(order, GeometricParams(p));
    if (grf) {
      st.seed = seed;
      st.threads = ctx.threads;
      sigma = solve_sigma_coupling(g, p, order, *f, st);
    } else {
      pc.seed = seed;
      pc.threads = ctx.threads;
      sigma = solve_pagerank_sigma(g, p, order, pc);
    }
    for (int q = 0; q < order; ++q)
      out.trials.add({target, num(p), num(order), num(q + 1), num(sigma.permutation()[q] + 1), num(ctx.seed)});
    entries.push_back(sigma_to_json(sigma, seed));
  }
  out.summary["target"] = target;
  if (kspec) out.summary["kernel"] = kspec->tag();
  out.summary["nodes"] = g.size();
  out.summary["couplings"] = entries;
  out.artifacts.emplace_back("sigma.json", json{{"target", target}, {"couplings", entries}}.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------- gp-eval

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

json posterior_json(const GaussianPosterior& post, double kl, double err) {
  return {{"mean", std::vector<double>(post.mean.begin(), post.mean.end())},
          {"cov_diag", std::vector<double>(post.cov.diagonal().begin(), post.cov.diagonal().end())},
          {"kl", kl},
          {"rmse", err}};
}

RunResult gp_eval(Config& cfg, const RunContext& ctx) {
  DataSettings data_settings;
  data_settings.read(cfg, 192);
  const int splits = positive(cfg.get_int("gp.splits", 20), "gp.splits");
  const double train_fraction = cfg.get_double("gp.train_fraction", 2.0 / 3.0);
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidRequest("gp.train_fraction must lie in (0, 1)");
  const Featurizer f = parse_featurizer(cfg.get_string("gp.featurizer", "rff"));
  const auto coupling_tags = cfg.get_strings("gp.couplings", {"orthogonal", "orthogonal_pnc"});
  const auto couplings = read_euclidean_couplings(cfg, "gp", coupling_tags);
  const auto grid = read_feature_grid(cfg, "gp.features");
  const int ensembles = positive(cfg.get_int("gp.ensembles", 20), "gp.ensembles");
  GpFitConfig fc;
  fc.steps = positive(cfg.get_int("gp.fit_steps", 300), "gp.fit_steps");
  fc.lr = cfg.get_double("gp.fit_lr", 0.05);
  cfg.check_all_used();

  Rng data_rng = make_stream(ctx.seed, kDataStream);
  const Dataset data = data_settings.raw(data_rng);
  const int d = static_cast<int>(data.x.cols());

  struct Task {
    std::size_t group;
    std::size_t coupling;
    int m;
    int ensemble;
  };
  std::vector<Task> tasks;
  std::vector<std::pair<std::size_t, int>> group_keys;  // (coupling, m)
  for (int m_setting : grid)
    for (std::size_t c = 0; c < couplings.size(); ++c) {
      const int m = resolve_features(m_setting, f, d, couplings);
      check_blocks(m, d, couplings);
      for (int e = 0; e < ensembles; ++e) tasks.push_back({group_keys.size(), c, m, e});
      group_keys.emplace_back(c, m);
    }

  struct Metrics {
    double kl = 0.0;
    double kl_per_datapoint = 0.0;
    double rmse = 0.0;
  };
  // results[split][task]
  std::vector<std::vector<Metrics>> results(static_cast<std::size_t>(splits));
  std::vector<double> exact_rmse(static_cast<std::size_t>(splits));
  json posteriors;

  for (int s = 0; s < splits; ++s) {
    Rng split_rng = make_stream(ctx.seed, kSplitStream, static_cast<std::uint64_t>(s));
    const Split split = make_split(data, train_fraction, split_rng);
    const auto& xd = split.train.x;
    const auto& xp = split.test.x;
    const auto& yd = split.train.y;
    const GaussianKernelParams kp = fit_hyperparams(xd, yd, {1.0, 1.0, 0.5}, fc);
    const GaussianPosterior exact =
        exact_posterior(gaussian_kernel_matrix(xd, xd, kp), gaussian_kernel_matrix(xp, xd, kp),
                        gaussian_kernel_matrix(xp, xp, kp), yd, kp.noise_scale);
    exact_rmse[static_cast<std::size_t>(s)] = rmse(exact.mean, split.test.y);
    if (s == 0) posteriors["exact"] = posterior_json(exact, 0.0, exact_rmse[0]);

    auto& row = results[static_cast<std::size_t>(s)];
    row.resize(tasks.size());
    std::vector<GaussianPosterior> first(group_keys.size());
    parallel_for(tasks.size(), ctx.threads, [&](std::size_t i) {
      const Task& task = tasks[i];
      const auto ens = build_ensemble(task.m, d, couplings[task.coupling],
                                      stream_seed(ctx.seed, kGroupStream + task.group,
                                                  static_cast<std::uint64_t>(s) * ensembles + task.ensemble));
      const GaussianPosterior approx =
          approx_posterior(featurize(xd, ens, kp, f), featurize(xp, ens, kp, f), yd, kp.noise_scale);
      const double kl = gaussian_kl(approx, exact);
      row[i] = {kl, kl / static_cast<double>(approx.mean.size()), rmse(approx.mean, split.test.y)};
      if (s == 0 && task.ensemble == 0) first[task.group] = approx;
    });
    if (s == 0)
      for (std::size_t gk = 0; gk < group_keys.size(); ++gk) {
        const std::size_t i = gk * static_cast<std::size_t>(ensembles);
        posteriors[couplings[group_keys[gk].first].tag() + "/m=" + std::to_string(group_keys[gk].second)] =
            posterior_json(first[gk], row[i].kl, row[i].rmse);
      }
  }

  RunResult out;
  out.trials = TrialTable({"split", "coupling", "m", "ensemble", "kl", "kl_per_datapoint", "rmse", "seed"});
  json groups = json::array();
  for (std::size_t gk = 0; gk < group_keys.size(); ++gk) {
    const auto [c, m] = group_keys[gk];
    const std::string tag = couplings[c].tag();
    std::vector<double> kl, klp, err;
    for (int s = 0; s < splits; ++s)
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].group != gk) continue;
        const Metrics& r = results[static_cast<std::size_t>(s)][i];
        out.trials.add({num(s), tag, num(m), num(tasks[i].ensemble), num(r.kl), num(r.kl_per_datapoint),
                        num(r.rmse), num(ctx.seed)});
        kl.push_back(r.kl);
        klp.push_back(r.kl_per_datapoint);
        err.push_back(r.rmse);
      }
    json entry = summary_entry({{"coupling", tag}, {"m", m}}, mean_se(klp), klp.size());
    const MeanSe kl_stat = mean_se(kl);
    const MeanSe rmse_stat = mean_se(err);
    entry["kl"] = {{"mean", kl_stat.mean}, {"se", kl_stat.se}, {"two_se", 2.0 * kl_stat.se}};
    entry["rmse"] = {{"mean", rmse_stat.mean}, {"se", rmse_stat.se}, {"two_se", 2.0 * rmse_stat.se}};
    groups.push_back(std::move(entry));
  }
  add_normalized(groups, baseline_of(couplings), {"m"});
  const MeanSe exact_stat = mean_se(exact_rmse);
  out.summary["metric"] = "kl_per_datapoint";
  out.summary["featurizer"] = featurizer_name(f);
  out.summary["baseline"] = baseline_of(couplings);
  out.summary["splits"] = splits;
  out.summary["exact_rmse"] = {{"mean", exact_stat.mean}, {"se", exact_stat.se}};
  out.summary["groups"] = std::move(groups);
  require_finite(posteriors, "posteriors.json");
  out.artifacts.emplace_back("posteriors.json", posteriors.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------- pagerank-bench

RunResult pagerank_bench(Config& cfg, const RunContext& ctx) {
  GraphSettings gs;
  gs.read(cfg);
  const auto p_grid = probabilities(cfg.get_doubles("pagerank.p_halt", {0.1, 0.2, 0.3, 0.4, 0.5}), "pagerank.p_halt");
  const int walkers = positive(cfg.get_int("pagerank.walkers", 2), "pagerank.walkers");
  const auto couplings = read_walk_couplings(cfg, "pagerank");
  const bool need_sigma = std::any_of(couplings.begin(), couplings.end(), [](auto& c) { return c.sigma; });
  SigmaSource source;
  PageRankSigmaConfig pc;
  if (need_sigma) {
    source.read(cfg, "pagerank", 10);
    if (!source.from_file())
      pc.samples_per_quantile =
          positive(cfg.get_int("pagerank.samples_per_quantile", 200), "pagerank.samples_per_quantile");
  }
  const int trials = positive(cfg.get_int("pagerank.trials", 200), "pagerank.trials");
  cfg.check_all_used();

  const GraphData g = gs.load(ctx.seed);

  RunResult out;
  out.trials = TrialTable({"p_halt", "coupling", "m", "trial", "l2_error", "seed"});
  json groups = json::array();
  json sigmas = json::array();
  std::size_t group = 0;
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    const double p = p_grid[pi];
    const Eigen::VectorXd exact = exact_pagerank(g, p);
    std::optional<SigmaCoupling> sigma;
    if (need_sigma) {
      if (source.from_file()) {
        sigma = source.lookup(p);
      } else {
        pc.seed = stream_seed(ctx.seed, kTrainStream, pi);
        pc.threads = ctx.threads;
        sigma = solve_pagerank_sigma(g, p, source.order, pc);
      }
      sigmas.push_back({{"p_halt", p}, {"n", sigma->order()}, {"sigma", sigma_entry_json(*sigma)}});
    }
    for (const auto& c : couplings) {
      const WalkCoupling wc = make_walk_coupling(c.tag, sigma);
      std::vector<double> err(static_cast<std::size_t>(trials));
      parallel_for(err.size(), ctx.threads, [&](std::size_t t) {
        const PageRankEstimate est = mc_pagerank(g, p, walkers, wc, trial_seed(ctx.seed, group, t));
        err[t] = (est.rho - exact).norm();
      });
      for (std::size_t t = 0; t < err.size(); ++t)
        out.trials.add({num(p), c.tag, num(walkers), num(static_cast<std::int64_t>(t)), num(err[t]), num(ctx.seed)});
      groups.push_back(summary_entry({{"p_halt", p}, {"coupling", c.tag}, {"m", walkers}}, mean_se(err), err.size()));
      ++group;
    }
  }
  std::vector<std::string> tags;
  for (const auto& c : couplings) tags.push_back(c.tag);
  add_normalized(groups, baseline_of(tags), {"p_halt", "m"});
  out.summary["metric"] = "l2_error";
  out.summary["baseline"] = baseline_of(tags);
  out.summary["nodes"] = g.size();
  out.summary["groups"] = std::move(groups);
  if (need_sigma) out.summary["sigma"] = std::move(sigmas);
  return out;
}

// ---------------------------------------------------------------- attention-bench

RunResult attention_bench(Config& cfg, const RunContext& ctx) {
  const int n = positive(cfg.get_int("tokens.n", 16), "tokens.n");
  const int d = positive(cfg.get_int("tokens.d", 16), "tokens.d");
  const double scale = cfg.get_double("tokens.scale", 0.15);
  if (!(scale > 0.0)) throw InvalidRequest("tokens.scale must be positive");
  const auto coupling_tags =
      cfg.get_strings("attention.couplings", {"orthogonal", "orthogonal_pnc", "positive_monotone"});
  const auto couplings = read_euclidean_couplings(cfg, "attention", coupling_tags);
  std::vector<int> grid;
  for (int m : read_feature_grid(cfg, "attention.features"))
    grid.push_back(resolve_features(m, Featurizer::rff, d, couplings));
  const int trials = positive(cfg.get_int("attention.trials", 2000), "attention.trials");
  const bool averaged = cfg.get_bool("attention.direction_averaged", false);
  const int pnc_samples = cfg.get_int("attention.pnc_samples", 20000);
  if (pnc_samples < 0) throw InvalidRequest("attention.pnc_samples must be nonnegative");
  cfg.check_all_used();

  Rng rng = make_stream(ctx.seed, kDataStream);
  Eigen::MatrixXd tokens(n, d);
  for (auto& v : tokens.reshaped()) v = scale * standard_normal(rng);
  for (int m : grid) check_blocks(m, d, couplings);

  RunResult out;
  out.trials = TrialTable({"coupling", "m", "trial", "attention_mse", "seed"});
  json groups = json::array();
  json differences = json::array();
  std::size_t group = 0;
  for (int m : grid) {
    for (const auto& spec : couplings) {
      AttentionConfig ac;
      ac.num_features = m;
      ac.coupling = spec;
      ac.trials = trials;
      ac.seed = stream_seed(ctx.seed, kGroupStream + group);
      ac.threads = ctx.threads;
      ac.direction_averaged = averaged;
      const AttentionStats st = attention_estimate(tokens, ac);
      for (std::size_t t = 0; t < st.trial_mse.size(); ++t)
        out.trials.add({spec.tag(), num(m), num(static_cast<std::int64_t>(t)), num(st.trial_mse[t]), num(ctx.seed)});
      json entry = summary_entry({{"coupling", spec.tag()}, {"m", m}}, st.attention_mse,
                                 static_cast<std::size_t>(st.trials));
      entry["kernel_variance"] = st.kernel_variance;
      entry["kernel_covariance"] = st.kernel_covariance;
      if (averaged)
        entry["kernel_variance_averaged"] = {{"mean", st.kernel_variance_averaged.mean},
                                             {"se", st.kernel_variance_averaged.se}};
      groups.push_back(std::move(entry));
      ++group;
    }
    if (pnc_samples >= 2) {
      const MeanSe diff =
          pnc_variance_difference(tokens, m, pnc_samples, stream_seed(ctx.seed, kTrainStream, m), ctx.threads);
      differences.push_back({{"m", m}, {"mean", diff.mean}, {"se", diff.se}, {"two_se", 2.0 * diff.se},
                             {"samples", pnc_samples}});
    }
  }
  add_normalized(groups, baseline_of(couplings), {"m"});
  out.summary["metric"] = "attention_mse";
  out.summary["baseline"] = baseline_of(couplings);
  out.summary["tokens"] = {{"n", n}, {"d", d}, {"scale", scale}};
  out.summary["groups"] = std::move(groups);
  if (!differences.empty()) out.summary["pnc_minus_orthogonal_kernel_variance"] = std::move(differences);
  return out;
}

using Runner = RunResult (*)(Config&, const RunContext&);

struct Kind {
  const char* name;
  const char* description;
  Runner run;
};

const std::vector<Kind>& kinds() {
  static const std::vector<Kind> table = {
      {"rf-bench", "Gram-matrix RMSE of Euclidean random features per coupling", rf_bench},
      {"copula-train", "learn a Gaussian-copula norm coupling by gradient descent", copula_train},
      {"grf-bench", "graph random feature kernel error per walk coupling", grf_bench},
      {"sigma-train", "learn walk-length permutation couplings", sigma_train},
      {"gp-eval", "GP posterior KL and RMSE with random-feature kernels", gp_eval},
      {"pagerank-bench", "Monte Carlo PageRank error per walk coupling", pagerank_bench},
      {"attention-bench", "softmax attention estimation error per coupling", attention_bench},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kinds()) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

std::string experiment_description(const std::string& kind) {
  for (const auto& k : kinds())
    if (kind == k.name) return k.description;
  return {};
}

RunResult run_experiment(const std::string& kind, Config& cfg, const RunContext& ctx) {
  for (const auto& k : kinds()) {
    if (kind != k.name) continue;
    RunResult result = k.run(cfg, ctx);
    require_finite(result.summary, "summary");
    return result;
  }
  throw InvalidRequest("unknown experiment '" + kind + "'");
}

}  // namespace otrf::cli

#include <benchmark/benchmark.h>

#include "otrf/graph.hpp"
#include "otrf/grf.hpp"
#include "otrf/matching.hpp"
#include "otrf/pagerank.hpp"

namespace {

using namespace otrf;

GraphData test_graph(int n) {
  Rng rng(17);
  return erdos_renyi_connected(n, 0.1, rng);
}

void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Eigen::MatrixXd cost(n, n);
  for (auto& v : cost.reshaped()) v = uniform01(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(cost));
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(30)->Arg(100);

void BM_GrfFeatureMatrix(benchmark::State& state) {
  const GraphData g = test_graph(static_cast<int>(state.range(0)));
  const ModulationFn f = modulation_for_kernel(GraphKernelSpec::regularized_laplacian(1.0, 2));
  const std::vector<WalkCoupling> couplings = {WalkCoupling::iid(), WalkCoupling::antithetic(),
                                               WalkCoupling::coupled(SigmaCoupling::identity(30, GeometricParams(0.2)))};
  const WalkCoupling& c = couplings[static_cast<std::size_t>(state.range(1))];
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(grf_feature_matrix(g, 2, c, f, 0.2, ++seed));
  state.SetLabel(c.tag());
}
BENCHMARK(BM_GrfFeatureMatrix)->Args({100, 0})->Args({100, 1})->Args({100, 2});

void BM_McPageRank(benchmark::State& state) {
  const GraphData g = test_graph(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mc_pagerank(g, 0.2, 2, WalkCoupling::antithetic(), ++seed));
}
BENCHMARK(BM_McPageRank)->Arg(100)->Arg(400);

void BM_ExactGraphKernel(benchmark::State& state) {
  const GraphData g = test_graph(static_cast<int>(state.range(0)));
  const auto spec = GraphKernelSpec::regularized_laplacian(1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(exact_graph_kernel(g, spec));
}
BENCHMARK(BM_ExactGraphKernel)->Arg(100)->Arg(300);

}  // namespace
BENCHMARK_MAIN();

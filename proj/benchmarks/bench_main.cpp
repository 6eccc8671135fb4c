#include <Eigen/Dense>
#include <benchmark/benchmark.h>

#include "latfuse/catalog.hpp"
#include "latfuse/cvp.hpp"
#include "latfuse/fusion.hpp"
#include "latfuse/nsm.hpp"
#include "latfuse/optimizer.hpp"
#include "latfuse/orthogonal.hpp"
#include "latfuse/reduction.hpp"

namespace {

using namespace latfuse;

const char* const kLattices[] = {"D4", "E8", "K12", "L16"};

void BM_ClosestPoint(benchmark::State& state) {
  const auto g = catalog_get(kLattices[state.range(0)]).generator;
  const ClosestPointSolver solver(g);
  auto rng = make_stream(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.closest_point(sample_uniform_mod_lattice(g, rng)));
  }
  state.SetLabel(kLattices[state.range(0)]);
}
BENCHMARK(BM_ClosestPoint)->DenseRange(0, 3);

void BM_Babai(benchmark::State& state) {
  const auto g = catalog_get(kLattices[state.range(0)]).generator;
  const ClosestPointSolver solver(g);
  auto rng = make_stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(solver.babai(sample_uniform_mod_lattice(g, rng)));
  state.SetLabel(kLattices[state.range(0)]);
}
BENCHMARK(BM_Babai)->DenseRange(0, 3);

void BM_Lll(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto rng = make_stream(2, 0);
  std::uniform_int_distribution<int> ui(-50, 50);
  Matrix m(n, n);
  do {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = ui(rng);
  } while (std::abs(m.determinant()) < 1);
  const GeneratorMatrix g(m);
  for (auto _ : state) benchmark::DoNotOptimize(lll_reduce(g));
}
BENCHMARK(BM_Lll)->Arg(8)->Arg(13)->Arg(22);

void BM_MatrixExp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto rng = make_stream(3, 0);
  const Matrix a = skew_init(n, 0.5, rng).a;
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exp(a));
}
BENCHMARK(BM_MatrixExp)->Arg(13)->Arg(22);

void BM_MatrixExpVjp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto rng = make_stream(4, 0);
  const Matrix a = skew_init(n, 0.5, rng).a;
  const Matrix g = skew_init(n, 1.0, rng).a;
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exp_vjp(a, g));
}
BENCHMARK(BM_MatrixExpVjp)->Arg(13)->Arg(22);

void BM_EstimateNsm(benchmark::State& state) {
  const auto g = build_product(make_optimal_spec(parse_components("K12,Z")));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_nsm(g, state.range(0), 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateNsm)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto spec = make_optimal_spec(parse_components("K12,Z"));
  auto rng = make_stream(6, 0);
  const auto model = make_householder_model(spec, rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(model, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "qcfb/coherent.hpp"
#include "qcfb/random.hpp"

namespace {

using namespace qcfb;

Matrix stable_matrix(Index n, std::uint64_t seed) {
  MatrixSampler rng(seed);
  Matrix a = rng.gaussian(n, n);
  return a - Complex(spectral_abscissa(a) + 0.5, 0.0) * Matrix::Identity(n, n);
}

void BM_Lyapunov(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix a = stable_matrix(n, 1);
  MatrixSampler rng(2);
  const Matrix b = rng.gaussian(n, n);
  const Matrix q = b * b.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov_hermitian(a, q));
}
BENCHMARK(BM_Lyapunov)->RangeMultiplier(2)->Range(2, 32);

void BM_Care(benchmark::State& state) {
  const Index n = state.range(0);
  MatrixSampler rng(3);
  const Matrix a = rng.gaussian(n, n);
  const Matrix b = rng.gaussian(n, n);
  const Matrix q = b * b.adjoint() + Matrix::Identity(n, n);
  const Matrix r = -Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_care_hermitian(a, r, q));
}
BENCHMARK(BM_Care)->RangeMultiplier(2)->Range(2, 16);

StateSpaceTF random_tf(Index n, Index io, std::uint64_t seed) {
  MatrixSampler rng(seed);
  return StateSpaceTF(stable_matrix(n, seed), rng.gaussian(n, io), rng.gaussian(io, n),
                      Matrix::Zero(io, io));
}

void BM_H2(benchmark::State& state) {
  const StateSpaceTF g = random_tf(state.range(0), 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(h2_norm(g));
}
BENCHMARK(BM_H2)->RangeMultiplier(2)->Range(2, 32);

void BM_Hinf(benchmark::State& state) {
  const StateSpaceTF g = random_tf(state.range(0), 2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(g));
}
BENCHMARK(BM_Hinf)->RangeMultiplier(2)->Range(2, 16);

void BM_CheckPr(benchmark::State& state) {
  const auto kind = state.range(1) == 0 ? SystemKind::annihilation : SystemKind::general;
  const auto r = random_pr_system(state.range(0), 2, 6, kind);
  for (auto _ : state) benchmark::DoNotOptimize(check_pr(r.system));
}
BENCHMARK(BM_CheckPr)->ArgsProduct({{1, 2, 4}, {0, 1}});

void BM_VerifyZeroGain(benchmark::State& state) {
  const PlantModel p = random_pr_plant(state.range(0), 2, 1, 7);
  const Matrix k_cw = Matrix::Identity(1, 1);
  const Matrix k_cy = Matrix::Zero(1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(verify_zero_gain(p, k_cy, k_cw));
}
BENCHMARK(BM_VerifyZeroGain)->DenseRange(1, 4);

void BM_VerifyTrivialHinf(benchmark::State& state) {
  const PlantModel p = random_pr_plant(2, 2, 1, 8, 0, 2);
  const auto challengers = random_challengers(p, static_cast<int>(state.range(0)), 9);
  for (auto _ : state) benchmark::DoNotOptimize(verify_trivial_hinf(p, challengers));
}
BENCHMARK(BM_VerifyTrivialHinf)->Arg(0)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_VerifyStaticLqg(benchmark::State& state) {
  const PlantModel p = random_pr_plant(2, 1, 1, 10, 1);
  StaticLqgOptions opts;
  opts.challengers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_static_lqg(p, opts));
}
BENCHMARK(BM_VerifyStaticLqg)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "irsec/ao.hpp"
#include "irsec/beamform.hpp"
#include "irsec/neuralphase.hpp"
#include "irsec/numerics.hpp"
#include "irsec/random.hpp"

using namespace irsec;

namespace {

SystemParams params(int n_s) {
  SystemParams p;
  p.n_s = n_s;
  p.beta_d = 0.4;
  p.beta_r = 0.3;
  return p;
}

PhaseConfig random_phases(int n_s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta(n_s);
  for (double& t : theta) t = rng.uniform(0.0, 6.283185307179586);
  return PhaseConfig(std::move(theta));
}

void BM_HermitianEigMax(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const CMat g = complex_normal_matrix(rng, n, n);
  const CMat h = gram(g);
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig_max(h));
}
BENCHMARK(BM_HermitianEigMax)->Arg(2)->Arg(4)->Arg(8);

void BM_OptimalBeam(benchmark::State& state) {
  const int n_s = static_cast<int>(state.range(0));
  const SystemParams p = params(n_s);
  const auto r = sample_legit(p, 2);
  const PhaseConfig phase = random_phases(n_s, 3);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_beam(r, phase, p));
}
BENCHMARK(BM_OptimalBeam)->Arg(16)->Arg(48);

void BM_AoSolve(benchmark::State& state) {
  const int n_s = static_cast<int>(state.range(0));
  const SystemParams p = params(n_s);
  const auto r = sample_legit(p, 4);
  AoConfig cfg;
  cfg.rng_seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(ao_solve(r, p, cfg));
}
BENCHMARK(BM_AoSolve)->Arg(16)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_PhaseNetForward(benchmark::State& state) {
  const int n_s = static_cast<int>(state.range(0));
  const SystemParams p = params(n_s);
  const PhaseNet net(NetArch::desk_scale(p.n_t, p.n_r, n_s), 6);
  const NetInput in = preprocess(sample_legit(p, 7), InputLayout::kChannelStack);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(in));
}
BENCHMARK(BM_PhaseNetForward)->Arg(16)->Arg(48)->Unit(benchmark::kMicrosecond);

void BM_InferSolution(benchmark::State& state) {
  const int n_s = static_cast<int>(state.range(0));
  const SystemParams p = params(n_s);
  const PhaseNet net(NetArch::desk_scale(p.n_t, p.n_r, n_s), 8);
  const auto r = sample_legit(p, 9);
  for (auto _ : state) benchmark::DoNotOptimize(infer_solution(net, r, p));
}
BENCHMARK(BM_InferSolution)->Arg(16)->Arg(48)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

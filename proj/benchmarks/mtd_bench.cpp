#include <benchmark/benchmark.h>

#include <random>

#include "mtd/autocorr.hpp"
#include "mtd/forward_model.hpp"
#include "mtd/moment_system.hpp"
#include "mtd/optimizer.hpp"
#include "mtd/score_prior.hpp"
#include "mtd/scorenet.hpp"

namespace mtd {
namespace {

Image random_image(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image x = Image::square(side);
  for (double& v : x.values()) v = u(rng);
  return x;
}

// Measurement engine throughput; state.range(0) is N, range(1) is L.
void BM_AutocorrMeasurement(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const int L = static_cast<int>(state.range(1));
  const Image x = random_image(L, 1);
  const SyntheticSource src(x, plan_placements(N, L, 0.1, 2), NoiseModel{0.1, 3});
  EngineOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(autocorr_measurement(src, L, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(N) * N);
}
BENCHMARK(BM_AutocorrMeasurement)->Args({512, 4})->Args({512, 8})->Args({1024, 8})->Unit(benchmark::kMillisecond);

void BM_AutocorrImage(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const Image x = random_image(L, 4);
  for (auto _ : state) benchmark::DoNotOptimize(autocorr_image(x, L));
}
BENCHMARK(BM_AutocorrImage)->Arg(4)->Arg(8)->Arg(14)->Unit(benchmark::kMicrosecond);

void BM_LossAndGradient(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  AutocorrSet measured = autocorr_image(random_image(L, 5), L);
  measured.scale(0.1);
  const MomentSystem sys = MomentSystem::build(measured, 0.1, 0.01);
  const Image x = random_image(L, 6);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(x, sys));
}
BENCHMARK(BM_LossAndGradient)->Arg(4)->Arg(8)->Arg(14)->Unit(benchmark::kMicrosecond);

void BM_GmmScore(benchmark::State& state) {
  const int L = 8;
  std::vector<GmmPrior::Component> comps;
  for (int k = 0; k < 3; ++k) comps.push_back({1.0 / 3, random_image(L, 10 + k), 0.001});
  const GmmPrior gmm(std::move(comps));
  const Image x = random_image(L, 7);
  for (auto _ : state) benchmark::DoNotOptimize(gmm.score(x));
}
BENCHMARK(BM_GmmScore)->Unit(benchmark::kMicrosecond);

void BM_ScoreNetForward(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const NeuralScoreNet net = make_reference_scorenet(L, 0.1f, 9);
  const Image x = random_image(L, 8);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_ScoreNetForward)->Arg(14)->Arg(28)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace mtd

// The distro benchmark_main archive is LTO bytecode tied to one compiler build.
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "coalsisr/datasim.hpp"
#include "coalsisr/sisr.hpp"
#include "coalsisr/stats.hpp"

using namespace coalsisr;

namespace {

std::vector<double> log_weights(std::size_t n) {
  RandomStream rng(9);
  std::vector<double> w(n);
  for (auto& x : w) x = -50.0 + 30.0 * rng.uniform();
  return w;
}

void BM_Ess(benchmark::State& state) {
  const auto w = log_weights(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ess(w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ess)->Range(64, 1 << 14);

void BM_ResamplingDistribution(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto w = log_weights(n);
  const auto data = simulate_dataset(static_cast<int>(n), 100, ScaledParams{0.4, 0.25, 40.0}, MutationModel::smm(200), 2);
  const PclContext ctx(40.0);
  ResamplingParams rp;
  for (auto _ : state) benchmark::DoNotOptimize(resampling_distribution(w, data.loci, rp, ctx));
}
BENCHMARK(BM_ResamplingDistribution)->Range(64, 1024);

void BM_Resample(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto data = simulate_dataset(1, 100, ScaledParams{0.4, 0.25, 40.0}, MutationModel::smm(200), 2);
  const auto w = log_weights(n);
  std::vector<Particle> particles(n, Particle(data.loci.front()));
  for (std::size_t i = 0; i < n; ++i) particles[i].log_w = w[i];
  ResamplingParams rp;
  rp.beta = 0.0;
  const auto v = resampling_distribution(w, {}, rp, PclContext(40.0));
  RandomStream rng(4);
  for (auto _ : state) {
    auto copy = particles;
    resample(copy, v, rng);
    benchmark::DoNotOptimize(copy.data());
  }
}
BENCHMARK(BM_Resample)->Range(64, 1024);

void BM_EstimateSisr(benchmark::State& state) {
  const Model model{Demography::contraction({0.4, 0.25, 40.0}), MutationModel::smm(200)};
  const HistorySampler sampler(model, SamplerConfig{});
  const auto h0 = simulate_dataset(1, 100, ScaledParams{0.4, 0.25, 40.0}, MutationModel::smm(200), 6).loci.front();
  SisrOptions opt;
  opt.nH = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_sisr(h0, sampler, opt));
    ++opt.seed;
  }
}
BENCHMARK(BM_EstimateSisr)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

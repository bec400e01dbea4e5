#include <benchmark/benchmark.h>

#include "coalsisr/datasim.hpp"
#include "coalsisr/sis.hpp"
#include "coalsisr/timing.hpp"

using namespace coalsisr;

namespace {

const ScaledParams kParams{0.4, 0.25, 40.0};

Model contraction_model() { return {Demography::contraction(kParams), MutationModel::smm(200)}; }

AlleleConfig sample(int genes) {
  return simulate_dataset(1, genes, kParams, MutationModel::smm(200), 11).loci.front();
}

void BM_RunHistory(benchmark::State& state) {
  const auto model = contraction_model();
  SamplerConfig cfg;
  cfg.proposal = static_cast<ProposalKind>(state.range(1));
  const HistorySampler sampler(model, cfg);
  const auto h0 = sample(static_cast<int>(state.range(0)));
  std::uint64_t j = 0;
  for (auto _ : state) {
    RandomStream rng(3, {j++});
    benchmark::DoNotOptimize(run_history(h0, sampler, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RunHistory)
    ->ArgNames({"genes", "proposal"})
    ->ArgsProduct({{10, 100, 492}, {static_cast<int>(ProposalKind::GriffithsTavare),
                                    static_cast<int>(ProposalKind::StephensDonnelly)}})
    ->Unit(benchmark::kMicrosecond);

void BM_Propose(benchmark::State& state) {
  const auto model = contraction_model();
  const Proposal proposal(model, static_cast<ProposalKind>(state.range(1)));
  const auto h = sample(static_cast<int>(state.range(0)));
  RandomStream rng(5);
  std::vector<Candidate> scratch;
  for (auto _ : state) benchmark::DoNotOptimize(proposal.propose(h, 0.1, rng, scratch));
}
BENCHMARK(BM_Propose)
    ->ArgNames({"genes", "proposal"})
    ->ArgsProduct({{10, 100, 492},
                   {static_cast<int>(ProposalKind::GriffithsTavare), static_cast<int>(ProposalKind::PclGuided),
                    static_cast<int>(ProposalKind::StephensDonnelly)}});

void BM_HoldingTime(benchmark::State& state) {
  const auto model = contraction_model();
  const auto r = HazardTerms::of(sample(50), model);
  const auto strategy = static_cast<HoldingStrategy>(state.range(0));
  RandomStream rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sample_holding(strategy, r, 0.2, model.demography, rng));
}
BENCHMARK(BM_HoldingTime)
    ->ArgName("thinning")
    ->Arg(static_cast<int>(HoldingStrategy::InverseCDF))
    ->Arg(static_cast<int>(HoldingStrategy::Thinning));

}  // namespace

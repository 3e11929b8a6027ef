#include <benchmark/benchmark.h>

#include "iab/harness.hpp"
#include "iab/optimize.hpp"
#include "iab/routing.hpp"

using namespace iab;

namespace {

// Reference urban instance, redrawn until it has an MBS and a UE.
NetworkInstance reference_instance() { return make_instance(ExperimentConfig{}, 0); }

void BM_LosIndexed(benchmark::State& state) {
  const auto inst = reference_instance();
  const auto idx = make_wall_index(inst.region, inst.walls);
  std::size_t u = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(idx.any_hit(inst.mbs[0], inst.ues[u]));
    u = (u + 1) % inst.ues.size();
  }
}
BENCHMARK(BM_LosIndexed);

void BM_LosLinearScan(benchmark::State& state) {
  const auto inst = reference_instance();
  std::size_t u = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(is_los(inst.mbs[0], inst.ues[u], inst.walls));
    u = (u + 1) % inst.ues.size();
  }
}
BENCHMARK(BM_LosLinearScan);

void BM_EvaluatorBuild(benchmark::State& state) {
  const auto inst = reference_instance();
  EvalOptions o;
  o.fading_draws = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CoverageEvaluator ev(inst, inst.sbs, TxPowers{}, ChannelParams{}, o, 3);
    benchmark::DoNotOptimize(ev.num_ue());
  }
}
BENCHMARK(BM_EvaluatorBuild)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SubsetEvaluation(benchmark::State& state) {
  const auto inst = reference_instance();
  EvalOptions o;
  o.fading_draws = 50;
  const CoverageEvaluator ev(inst, inst.sbs, TxPowers{}, ChannelParams{}, o, 3);
  Deployment dep;
  dep.sbs_positions = inst.sbs;
  std::vector<std::size_t> all(inst.sbs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Rng rng(2);
  for (auto _ : state) {
    dep.non_iab = random_subset(all, 5, rng);
    benchmark::DoNotOptimize(ev.evaluate(dep, 100e6).rho);
  }
}
BENCHMARK(BM_SubsetEvaluation)->Unit(benchmark::kMicrosecond);

void BM_GaNonIab(benchmark::State& state) {
  const auto inst = reference_instance();
  Objective ob;
  ob.instance = &inst;
  ob.options.fading_draws = 50;
  for (auto _ : state) {
    SubsetFitness fit(ob, inst.sbs);
    Rng rng(4);
    benchmark::DoNotOptimize(ga_non_iab(fit, 5, GaParams{}, rng).best.rho);
  }
}
BENCHMARK(BM_GaNonIab)->Unit(benchmark::kMillisecond);

void BM_BapRoundTrip(benchmark::State& state) {
  std::uint32_t v = 0;
  for (auto _ : state) {
    const BapHeader h{false, 0, static_cast<std::uint16_t>(v & 0x3FF), static_cast<std::uint16_t>((v >> 10) & 0x3FF)};
    benchmark::DoNotOptimize(bap_decode(bap_encode(h)));
    ++v;
  }
}
BENCHMARK(BM_BapRoundTrip);

}  // namespace

BENCHMARK_MAIN();

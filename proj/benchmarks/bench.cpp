#include <benchmark/benchmark.h>

#include "dualgem/angular.hpp"
#include "dualgem/atomic.hpp"
#include "dualgem/gem.hpp"
#include "dualgem/polarisation.hpp"

using namespace dualgem;

namespace {

void BM_Wigner6j(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(wigner_6j(0.5, 0.5, 1.0, 2.0, 1.0, 1.5));
    benchmark::DoNotOptimize(wigner_6j(3.0, 2.0, 1.0, 2.0, 3.0, 4.0));
  }
}
BENCHMARK(BM_Wigner6j);

void BM_TransitionTable(benchmark::State& state) {
  for (auto _ : state) {
    TransitionTable table;
    benchmark::DoNotOptimize(table.entries().size());
  }
}
BENCHMARK(BM_TransitionTable);

void BM_EffectiveCouplings(benchmark::State& state) {
  const auto control = PolarisationState::V();
  for (auto _ : state) {
    benchmark::DoNotOptimize(effective_couplings(1, control, 200.0));
  }
}
BENCHMARK(BM_EffectiveCouplings);

void BM_StorageRecall(benchmark::State& state) {
  GemParams params;
  params.beta = 0.2;
  params.n_z = static_cast<int>(state.range(0));
  params.t_end_us = 60.0;
  GradientProgram program;
  program.flip_time_us = 22.0;
  const auto input = PulseEnvelope::gaussian(10.0, 10.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_storage_recall(params, program, input));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StorageRecall)->Arg(64)->Arg(128)->Arg(256)->Unit(
    benchmark::kMillisecond);

void BM_AbsorptionSpectrum(benchmark::State& state) {
  SpectrumParams sp;
  std::vector<double> probe;
  probe.reserve(401);
  for (int k = -200; k <= 200; ++k) probe.push_back(0.02 * k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(absorption_spectrum(1.0, 1.0, sp, probe));
  }
}
BENCHMARK(BM_AbsorptionSpectrum);

}  // namespace

BENCHMARK_MAIN();

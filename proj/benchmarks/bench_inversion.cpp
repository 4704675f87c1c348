#include <benchmark/benchmark.h>

#include "mwi/inversion.hpp"

namespace {

using namespace mwi;

struct Setup {
  Model truth = make_camembert(142.0);
  Model start = make_homogeneous(truth.nx(), truth.nz(), truth.h(), 4000.0);
  Acquisition acq;
  ShotData observed;

  Setup() {
    start.set_velocity_bounds(4000.0, 4600.0);
    acq.sources = line_positions(7, Side::top, truth.nx(), truth.nz(), 2);
    acq.receivers = line_positions(40, Side::bottom, truth.nx(), truth.nz(), 2);
    acq.peak_frequency = 5.0;
    acq.frequencies = {2.0, 3.0, 4.0};
    observed = forward_map(truth, acq);
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_ForwardMap(benchmark::State& st) {
  const Setup& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(forward_map(s.start, s.acq));
}
BENCHMARK(BM_ForwardMap)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& st) {
  const Setup& s = setup();
  const bool with_ph = st.range(0) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(misfit_and_gradient(s.start, s.acq, s.observed, {}, with_ph));
}
BENCHMARK(BM_Gradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MwiIteration(benchmark::State& st) {
  const Setup& s = setup();
  RunConfig cfg;
  cfg.iterations = 1;
  for (auto _ : st) benchmark::DoNotOptimize(run_inversion(cfg, s.acq, s.observed, s.start));
}
BENCHMARK(BM_MwiIteration)->Unit(benchmark::kMillisecond);

}  // namespace

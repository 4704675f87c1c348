#include <benchmark/benchmark.h>

#include <numbers>

#include "mwi/helmholtz.hpp"
#include "mwi/model.hpp"

namespace {

using namespace mwi;

constexpr double kOmega = 2.0 * std::numbers::pi * 6.0;

Model square(int n) { return make_homogeneous(n, n, 50.0, 2500.0); }

void BM_Assemble(benchmark::State& st) {
  const Model m = square(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(assemble(m, kOmega, {}));
}
BENCHMARK(BM_Assemble)->Arg(32)->Arg(64)->Arg(128);

void BM_Factorize(benchmark::State& st) {
  const auto op = assemble(square(static_cast<int>(st.range(0))), kOmega, {});
  for (auto _ : st) benchmark::DoNotOptimize(factorize(op));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Factorize)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SolveBatch(benchmark::State& st) {
  const auto op = assemble(square(64), kOmega, {});
  const auto fac = factorize(op);
  const int k = static_cast<int>(st.range(0));
  FieldBatch b(op.geometry(), k);
  for (int j = 0; j < k; ++j) b(op.geometry().node({10 + j, 10}), j) = 1.0;
  for (auto _ : st) {
    FieldBatch x = b;
    fac.solve(x);
    benchmark::DoNotOptimize(x.values.data());
  }
  st.SetItemsProcessed(st.iterations() * k);
}
BENCHMARK(BM_SolveBatch)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_SolveAdjoint(benchmark::State& st) {
  const auto op = assemble(square(64), kOmega, {});
  const auto fac = factorize(op);
  Field b(op.geometry());
  b.at({32, 32}) = 1.0;
  for (auto _ : st) benchmark::DoNotOptimize(solve_adjoint(fac, b));
}
BENCHMARK(BM_SolveAdjoint)->Unit(benchmark::kMicrosecond);

}  // namespace

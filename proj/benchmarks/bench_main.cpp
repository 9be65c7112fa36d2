#include <benchmark/benchmark.h>

#include <cmath>

#include "relaxflow/dynamics.hpp"
#include "relaxflow/elliptic.hpp"
#include "relaxflow/relent.hpp"

using namespace relaxflow;

namespace {

ScalarField profile(const TorusGrid& g) {
  return ScalarField::from_function(g, [](double x, double y) {
    return 1.0 + 0.2 * std::cos(x) + 0.05 * std::sin(2.0 * y);
  });
}

void BM_Gradient(benchmark::State& st) {
  const TorusGrid g(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  Spectral ops(g);
  const ScalarField f = profile(g);
  for (auto _ : st) benchmark::DoNotOptimize(ops.gradient(f));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_Gradient)->Args({1, 256})->Args({1, 4096})->Args({2, 128});

void BM_ScreenedPoisson(benchmark::State& st) {
  const TorusGrid g(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  Spectral ops(g);
  const ScalarField f = profile(g);
  for (auto _ : st) benchmark::DoNotOptimize(solve_screened_poisson(f, 1.0, ops));
}
BENCHMARK(BM_ScreenedPoisson)->Args({1, 256})->Args({2, 128});

void BM_StepRelax(benchmark::State& st) {
  const TorusGrid g(1, static_cast<int>(st.range(0)));
  Spectral ops(g);
  const EnergyModel m = EnergyModel::euler_poisson(GammaLaw(1.0, 2.0), 0.1, 1.0);
  const ScalarField rho = profile(g);
  const double eps = 0.05;
  RelaxState s{rho, equilibrium_momentum(m, rho, eps, ops), 0.0};
  const double dt = 0.5 * cfl_dt_relax(m, s, eps, 0.4);
  for (auto _ : st) benchmark::DoNotOptimize(step_relax(m, s, dt, eps, ops));
}
BENCHMARK(BM_StepRelax)->Arg(256)->Arg(1024);

void BM_StepLimitCahnHilliard(benchmark::State& st) {
  const TorusGrid g(1, static_cast<int>(st.range(0)));
  Spectral ops(g);
  const EnergyModel m = EnergyModel::euler_korteweg(GammaLaw(1.0, 2.0), 0.01);
  const LimitState s{profile(g), 0.0};
  for (auto _ : st)
    benchmark::DoNotOptimize(step_limit(m, s, 1e-5, Scheme::SemiImplicitSpectral, ops));
}
BENCHMARK(BM_StepLimitCahnHilliard)->Arg(256)->Arg(1024);

void BM_RelativeStress(benchmark::State& st) {
  const TorusGrid g(2, static_cast<int>(st.range(0)));
  Spectral ops(g);
  const EnergyModel m = EnergyModel::euler_korteweg(GammaLaw(1.0, 2.0), 0.01);
  const ScalarField a = profile(g);
  const ScalarField b = a + 0.01;
  for (auto _ : st) benchmark::DoNotOptimize(relative_stress(m, a, b, ops));
}
BENCHMARK(BM_RelativeStress)->Arg(64);

}  // namespace
BENCHMARK_MAIN();

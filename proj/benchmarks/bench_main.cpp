#include <benchmark/benchmark.h>

#include "calderon/forward.hpp"
#include "calderon/landscape.hpp"
#include "calderon/linalg.hpp"

using namespace calderon;

static void BM_ForwardMap(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RadialGeometry geom(n);
  const Conductivity sigma(n, 1.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_map(geom, sigma, n));
}
BENCHMARK(BM_ForwardMap)->Arg(2)->Arg(5)->Arg(10);

static void BM_AnalyticJacobian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RadialGeometry geom(n);
  const Conductivity sigma(n, 1.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(analytic_jacobian(geom, sigma, n));
}
BENCHMARK(BM_AnalyticJacobian)->Arg(2)->Arg(5)->Arg(10);

static void BM_JacobiSvd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RadialGeometry geom(n);
  const DenseMatrix jac = analytic_jacobian(geom, Conductivity(n, 1.2), n);
  for (auto _ : state)
    benchmark::DoNotOptimize(jacobi_svd(jac));
}
BENCHMARK(BM_JacobiSvd)->Arg(4)->Arg(6);

static void BM_DetScanPoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RadialGeometry geom(n);
  const Conductivity sigma(n, 1.25);
  for (auto _ : state) {
    const DenseMatrix jac = analytic_jacobian(geom, sigma, n);
    benchmark::DoNotOptimize(lu_det(jac));
    benchmark::DoNotOptimize(jacobi_svd(jac));
  }
}
BENCHMARK(BM_DetScanPoint)->Arg(6);

BENCHMARK_MAIN();

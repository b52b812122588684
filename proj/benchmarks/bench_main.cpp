#include <benchmark/benchmark.h>

#include <cmath>

#include "watsonmle/kappa.hpp"
#include "watsonmle/kummer.hpp"
#include "watsonmle/linalg.hpp"
#include "watsonmle/mixture.hpp"
#include "watsonmle/watson.hpp"

namespace {

using namespace watsonmle;

// Arg: c; kappa fixed at c so the series peak sits mid-range.
void BM_KummerRatio(benchmark::State& state) {
  const double c = static_cast<double>(state.range(0));
  const KummerParams params{0.5, c};
  for (auto _ : state) benchmark::DoNotOptimize(kummer_ratio(params, c));
}
BENCHMARK(BM_KummerRatio)->Arg(5)->Arg(50)->Arg(500)->Arg(5000);

void BM_KummerRatioNegative(benchmark::State& state) {
  const double c = static_cast<double>(state.range(0));
  const KummerParams params{0.5, c};
  for (auto _ : state) benchmark::DoNotOptimize(kummer_ratio(params, -c));
}
BENCHMARK(BM_KummerRatioNegative)->Arg(5)->Arg(500)->Arg(5000);

void BM_SolveKappa(benchmark::State& state) {
  const auto method = static_cast<KappaMethod>(state.range(0));
  const KummerParams params{0.5, 500.0};
  state.SetLabel(std::string(to_string(method)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_kappa(params, 0.7, method).kappa);
}
BENCHMARK(BM_SolveKappa)
    ->Arg(static_cast<int>(KappaMethod::L))
    ->Arg(static_cast<int>(KappaMethod::B))
    ->Arg(static_cast<int>(KappaMethod::U))
    ->Arg(static_cast<int>(KappaMethod::BBG))
    ->Arg(static_cast<int>(KappaMethod::Combined))
    ->Arg(static_cast<int>(KappaMethod::Newton));

void BM_SymEig(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const ScatterMatrix S = scatter(sample_uniform_sphere(p, 4 * p, 1));
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(S).values.front());
}
BENCHMARK(BM_SymEig)->RangeMultiplier(2)->Range(4, 64);

void BM_EmIteration(benchmark::State& state) {
  const std::size_t p = 30;
  std::vector<Vector> rows;
  for (std::size_t j = 0; j < 2; ++j) {
    Vector mu(p, 0.0);
    mu[j] = 1.0;
    const Matrix part = sample({mu, 100.0}, 500, 2 + j);
    for (std::size_t i = 0; i < part.rows(); ++i) {
      const auto r = part.row(i);
      rows.emplace_back(r.begin(), r.end());
    }
  }
  const Matrix X = Matrix::from_rows(rows);
  EmConfig config;
  config.max_iters = 1;
  for (auto _ : state) benchmark::DoNotOptimize(em_fit(X, 2, config).ll_trace.back());
}
BENCHMARK(BM_EmIteration)->Unit(benchmark::kMillisecond);

}  // namespace

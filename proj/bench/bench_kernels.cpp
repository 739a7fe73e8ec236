// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/grid.hpp"
#include "varfn/kernels.hpp"
#include "varfn/measure.hpp"
#include "varfn/solver.hpp"
#include "varfn/variation.hpp"

using namespace varfn;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(g);
  return v;
}

const Evaluable kField = [](std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < 12; ++k) s += eval_legendre(k, y[0]) * eval_legendre(k, y[1]);
  return s * s;
};

void BM_TabulateSerial(benchmark::State& st) {
  const Grid g = standard_grid(2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::tabulate(kField, g));
}

void BM_TabulateParallel(benchmark::State& st) {
  const Grid g = standard_grid(2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::tabulate(kField, g, int(st.range(0))));
}

void BM_GramSerial(benchmark::State& st) {
  const std::size_t n = 4000, dim = std::size_t(st.range(0));
  const auto f = random_vec(n * dim, 1);
  const std::vector<double> w(n, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::weighted_gram(f, dim, w));
}

void BM_GramParallel(benchmark::State& st) {
  const std::size_t n = 4000, dim = std::size_t(st.range(0));
  const auto f = random_vec(n * dim, 1);
  const std::vector<double> w(n, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::weighted_gram(f, dim, w, 0));
}

void BM_HausdorffSerial(benchmark::State& st) {
  const auto a = random_vec(3 * 2000, 2), b = random_vec(3 * 2000, 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::hausdorff({a, 3}, {b, 3}));
}

void BM_HausdorffParallel(benchmark::State& st) {
  const auto a = random_vec(3 * 2000, 2), b = random_vec(3 * 2000, 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::hausdorff({a, 3}, {b, 3}, int(st.range(0))));
}

// Dense reference hard thresholding against the implicit-operator version.
template <bool Reference>
void BM_Iht(benchmark::State& st) {
  const std::vector<std::size_t> dims(std::size_t(st.range(0)), 6);
  const TensorBasis basis = TensorBasis::legendre(dims);
  const CoeffTensor u = phase_target(PhaseTarget::Exp, dims.size(), 6);
  const SampleBatch b = draw_samples(DomainSpec(dims.size()), ambient_optimal_weight(dims), 300, 4);
  std::vector<double> v(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) v[i] = eval_function(u, basis, b.point(i));
  for (auto _ : st) {
    if constexpr (Reference)
      benchmark::DoNotOptimize(reference::solve_iht_rank1(basis, b, v));
    else
      benchmark::DoNotOptimize(solve_iht_rank1(basis, b, v));
  }
}

}  // namespace

BENCHMARK(BM_TabulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TabulateParallel)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HausdorffSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HausdorffParallel)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Iht<true>)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Iht<false>)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

// Serial reference kernels against their OpenMP counterparts, at the shapes
// of one training batch (128 instances, 16 inputs, 256-wide embeddings).
#include <random>

#include <benchmark/benchmark.h>

#include "derwent/kernels.hpp"

namespace {

using derwent::Matrix;
namespace kernels = derwent::kernels;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = u(rng);
  return m;
}

template <Matrix (*Kernel)(const Matrix&, const Matrix&)>
void bm_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 256, 1);
  const Matrix b = random_matrix(256, 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 256 * 256));
}

template <Matrix (*Kernel)(const Matrix&, const Matrix&, const Matrix&)>
void bm_affine_tanh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n, 16, 3);
  const Matrix w = random_matrix(16, 256, 4);
  const Matrix bias = random_matrix(1, 256, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, w, bias));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 16 * 256));
}

template <Matrix (*Kernel)(const Matrix&)>
void bm_pairwise_cosine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix rows = random_matrix(n, 256, 6);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(rows));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * 256));
}

BENCHMARK(bm_matmul<kernels::serial::matmul>)->Name("matmul/serial")->Arg(128)->Arg(512);
BENCHMARK(bm_matmul<kernels::omp::matmul>)->Name("matmul/omp")->Arg(128)->Arg(512);
BENCHMARK(bm_affine_tanh<kernels::serial::affine_tanh>)
    ->Name("affine_tanh/serial")
    ->Arg(128)
    ->Arg(1024);
BENCHMARK(bm_affine_tanh<kernels::omp::affine_tanh>)->Name("affine_tanh/omp")->Arg(128)->Arg(1024);
BENCHMARK(bm_pairwise_cosine<kernels::serial::pairwise_cosine>)
    ->Name("pairwise_cosine/serial")
    ->Arg(128)
    ->Arg(512);
BENCHMARK(bm_pairwise_cosine<kernels::omp::pairwise_cosine>)
    ->Name("pairwise_cosine/omp")
    ->Arg(128)
    ->Arg(512);

}  // namespace

BENCHMARK_MAIN();

// Serial reference kernels against their OpenMP counterparts. Set
// OMP_NUM_THREADS to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>

#include "qcm/kernels.hpp"
#include "qcm/modulus_lab.hpp"

namespace {

qcm::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  qcm::Matrix m(rows, cols);
  for (double& v : m.data()) v = g(rng);
  return m;
}

template <qcm::Matrix (*F)(const qcm::Matrix&, const qcm::Matrix&)>
void bm_multiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
}

template <qcm::Matrix (*F)(const qcm::Matrix&)>
void bm_gram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(2 * n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(F(a));
}

template <qcm::kernels::JacobiResult (*F)(const qcm::Matrix&, const qcm::kernels::JacobiOptions&)>
void bm_jacobi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 4);
  int sweeps = 0;
  for (auto _ : state) {
    auto res = F(a, {});
    sweeps = res.sweeps;
    benchmark::DoNotOptimize(res);
  }
  state.counters["sweeps"] = sweeps;
}

// The kernel that dominates the bound-chain experiments.
void bm_upper_statistic(benchmark::State& state) {
  const auto ifs = qcm::fixture("gasket");
  const auto model = qcm::discretize(ifs, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qcm::upper_statistic(model, 1.0, ifs.hausdorff_dim()));
}

}  // namespace

BENCHMARK(bm_multiply<qcm::kernels::serial::multiply>)->Name("multiply/serial")->Arg(128)->Arg(256);
BENCHMARK(bm_multiply<qcm::kernels::multiply>)->Name("multiply/omp")->Arg(128)->Arg(256);
BENCHMARK(bm_gram<qcm::kernels::serial::gram>)->Name("gram/serial")->Arg(128)->Arg(256);
BENCHMARK(bm_gram<qcm::kernels::gram>)->Name("gram/omp")->Arg(128)->Arg(256);
BENCHMARK(bm_jacobi<qcm::kernels::serial::jacobi_singular_values>)
    ->Name("jacobi/serial")
    ->Arg(64)
    ->Arg(128)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_jacobi<qcm::kernels::jacobi_singular_values>)
    ->Name("jacobi/omp")
    ->Arg(64)
    ->Arg(128)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_upper_statistic)->Name("upper_statistic/gasket_r1")->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

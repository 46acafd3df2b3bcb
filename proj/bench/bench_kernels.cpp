// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "salisa/kernels.hpp"
#include "salisa/tps.hpp"

using namespace salisa;

namespace {

Eigen::MatrixX2d random_coefficients(int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  Eigen::MatrixX2d w(rows, 2);
  for (int i = 0; i < rows; ++i) w.row(i) << u(rng), u(rng);
  w(rows - 2, 0) = 1.0;
  w(rows - 1, 1) = 1.0;
  return w;
}

using DenseFn = void (*)(std::span<const NormCoord>, const Eigen::MatrixX2d&, int, int, Eigen::MatrixX2d&);

template <DenseFn F>
void BM_DenseGrid(benchmark::State& state) {
  const ControlGrid control(static_cast<int>(state.range(0)));
  const auto w = random_coefficients(control.size() + 3, 1);
  const int height = static_cast<int>(state.range(1));
  const int width = height * 16 / 9;
  Eigen::MatrixX2d out;
  for (auto _ : state) {
    F(control.points(), w, height, width, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * height * width);
}

using WarpFn = void (*)(std::span<const float>, Extent, int, const SamplingGrid&, std::span<float>);

template <WarpFn F>
void BM_Warp(benchmark::State& state) {
  const Extent src{720, 1280};
  std::vector<float> pixels(static_cast<std::size_t>(src.height) * src.width * 3);
  std::mt19937 rng(2);
  for (auto& p : pixels) p = static_cast<float>(rng() % 256) / 255.0f;
  const SamplingGrid grid = identity_grid(360, 640);
  std::vector<float> out(static_cast<std::size_t>(grid.height()) * grid.width() * 3);
  for (auto _ : state) {
    F(pixels, src, 3, grid, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * grid.height() * grid.width());
}

using NormalFn = void (*)(const kernels::RowMatrixXd&, std::span<const double>, const Eigen::MatrixX2d&,
                          Eigen::MatrixXd&, Eigen::MatrixX2d&);

template <NormalFn F>
void BM_NormalEquations(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int cells = 128 * 128;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  kernels::RowMatrixXd bt(n, cells);
  for (Eigen::Index k = 0; k < bt.size(); ++k) bt.data()[k] = u(rng);
  std::vector<double> weights(cells);
  for (auto& v : weights) v = (u(rng) + 1.0) / 2.0;
  Eigen::MatrixX2d r(cells, 2);
  for (Eigen::Index k = 0; k < r.size(); ++k) r.data()[k] = u(rng);
  Eigen::MatrixXd a;
  Eigen::MatrixX2d b;
  for (auto _ : state) {
    F(bt, weights, r, a, b);
    benchmark::DoNotOptimize(a.data());
  }
}

}  // namespace

BENCHMARK(BM_DenseGrid<kernels::dense_grid_serial>)->Name("dense_grid/serial")->Args({256, 90})->Args({256, 360})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseGrid<kernels::dense_grid_omp>)->Name("dense_grid/omp")->Args({256, 90})->Args({256, 360})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Warp<kernels::warp_bilinear_serial>)->Name("warp/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Warp<kernels::warp_bilinear_omp>)->Name("warp/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalEquations<kernels::normal_equations_serial>)->Name("normal_equations/serial")->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalEquations<kernels::normal_equations_omp>)->Name("normal_equations/omp")->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sfcsim/nn/kernels.hpp"

namespace k = sfc::nn::kernels;

namespace {

struct Buffers {
  k::Dims d;
  std::vector<double> x, w, b, y, dy, dx, dw, db;

  explicit Buffers(k::Dims dims) : d(dims) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    auto fill = [&](std::vector<double>& v, std::size_t n) {
      v.resize(n);
      for (auto& e : v) e = u(rng);
    };
    fill(x, d.rows * d.in);
    fill(w, d.out * d.in);
    fill(b, d.out);
    fill(dy, d.rows * d.out);
    y.assign(d.rows * d.out, 0);
    dx.assign(d.rows * d.in, 0);
    dw.assign(d.out * d.in, 0);
    db.assign(d.out, 0);
  }
};

k::Dims dims_of(const benchmark::State& s) {
  return {static_cast<std::size_t>(s.range(0)), static_cast<std::size_t>(s.range(1)),
          static_cast<std::size_t>(s.range(2))};
}

template <bool Omp>
void BM_Forward(benchmark::State& s) {
  Buffers buf(dims_of(s));
  for (auto _ : s) {
    if constexpr (Omp)
      k::omp::affine_forward(buf.d, buf.x, buf.w, buf.b, buf.y);
    else
      k::serial::affine_forward(buf.d, buf.x, buf.w, buf.b, buf.y);
    benchmark::DoNotOptimize(buf.y.data());
  }
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(buf.d.rows * buf.d.in * buf.d.out));
}

template <bool Omp>
void BM_BackwardInput(benchmark::State& s) {
  Buffers buf(dims_of(s));
  for (auto _ : s) {
    if constexpr (Omp)
      k::omp::affine_backward_input(buf.d, buf.dy, buf.w, buf.dx);
    else
      k::serial::affine_backward_input(buf.d, buf.dy, buf.w, buf.dx);
    benchmark::DoNotOptimize(buf.dx.data());
  }
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(buf.d.rows * buf.d.in * buf.d.out));
}

template <bool Omp>
void BM_BackwardParams(benchmark::State& s) {
  Buffers buf(dims_of(s));
  for (auto _ : s) {
    if constexpr (Omp)
      k::omp::affine_backward_params(buf.d, buf.dy, buf.x, buf.dw, buf.db);
    else
      k::serial::affine_backward_params(buf.d, buf.dy, buf.x, buf.dw, buf.db);
    benchmark::DoNotOptimize(buf.dw.data());
  }
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(buf.d.rows * buf.d.in * buf.d.out));
}

// {batch, in, out}: action selection and a minibatch on the 5-DC input
// layer, then the hidden layers at batch 64 and 256.
void shapes(benchmark::internal::Benchmark* b) {
  b->Args({1, 155, 128})->Args({64, 155, 128})->Args({64, 128, 64})->Args({256, 128, 64})->Args({64, 64, 61});
}

}  // namespace

BENCHMARK(BM_Forward<false>)->Name("forward/serial")->Apply(shapes);
BENCHMARK(BM_Forward<true>)->Name("forward/omp")->Apply(shapes);
BENCHMARK(BM_BackwardInput<false>)->Name("backward_input/serial")->Apply(shapes);
BENCHMARK(BM_BackwardInput<true>)->Name("backward_input/omp")->Apply(shapes);
BENCHMARK(BM_BackwardParams<false>)->Name("backward_params/serial")->Apply(shapes);
BENCHMARK(BM_BackwardParams<true>)->Name("backward_params/omp")->Apply(shapes);

BENCHMARK_MAIN();

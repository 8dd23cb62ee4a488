#pragma once

#include <cstddef>
#include <span>

// Dense-layer kernels. Matrices are row-major; a batch is `rows` samples.
//
// The serial and OpenMP versions accumulate in exactly the same order, so
// their results are bitwise identical; the serial one is the reference the
// tests compare against.

namespace sfc::nn::kernels {

struct Dims {
  std::size_t rows;  // batch
  std::size_t in;
  std::size_t out;
};

namespace serial {
// out[r][o] = b[o] + sum_i W[o][i] * x[r][i]  (sum taken in four interleaved lanes)
void affine_forward(Dims d, std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> out);
// dx[r][i] = sum_o dy[r][o] * W[o][i]
void affine_backward_input(Dims d, std::span<const double> dy, std::span<const double> w, std::span<double> dx);
// dW[o][i] += sum_r dy[r][o] * x[r][i];  db[o] += sum_r dy[r][o]
void affine_backward_params(Dims d, std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                            std::span<double> db);
}  // namespace serial

namespace omp {
void affine_forward(Dims d, std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> out);
void affine_backward_input(Dims d, std::span<const double> dy, std::span<const double> w, std::span<double> dx);
void affine_backward_params(Dims d, std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                            std::span<double> db);
}  // namespace omp

// Picks OpenMP above a work threshold, serial below it.
void affine_forward(Dims d, std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> out);
void affine_backward_input(Dims d, std::span<const double> dy, std::span<const double> w, std::span<double> dx);
void affine_backward_params(Dims d, std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                            std::span<double> db);

inline constexpr std::size_t kParallelWorkThreshold = 1 << 16;

}  // namespace sfc::nn::kernels

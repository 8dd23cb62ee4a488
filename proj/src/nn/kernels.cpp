#include "sfcsim/nn/kernels.hpp"

#include <cstdint>

namespace sfc::nn::kernels {

namespace {
// Fixed four-lane summation order, shared by both implementations.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

namespace serial {

void affine_forward(Dims d, std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> out) {
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* xr = x.data() + r * d.in;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double* wo = w.data() + o * d.in;
      out[r * d.out + o] = b[o] + dot(wo, xr, d.in);
    }
  }
}

void affine_backward_input(Dims d, std::span<const double> dy, std::span<const double> w, std::span<double> dx) {
  for (std::size_t r = 0; r < d.rows; ++r) {
    double* dxr = dx.data() + r * d.in;
    for (std::size_t i = 0; i < d.in; ++i) dxr[i] = 0.0;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double g = dy[r * d.out + o];
      const double* wo = w.data() + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) dxr[i] += g * wo[i];
    }
  }
}

void affine_backward_params(Dims d, std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                            std::span<double> db) {
  for (std::size_t o = 0; o < d.out; ++o) {
    double* dwo = dw.data() + o * d.in;
    double bacc = db[o];
    for (std::size_t r = 0; r < d.rows; ++r) {
      const double g = dy[r * d.out + o];
      const double* xr = x.data() + r * d.in;
      for (std::size_t i = 0; i < d.in; ++i) dwo[i] += g * xr[i];
      bacc += g;
    }
    db[o] = bacc;
  }
}

}  // namespace serial

namespace omp {

// Each output element is owned by one thread and summed in the serial order.

void affine_forward(Dims d, std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> out) {
  const auto rows = static_cast<std::int64_t>(d.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * d.in;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double* wo = w.data() + o * d.in;
      out[r * d.out + o] = b[o] + dot(wo, xr, d.in);
    }
  }
}

void affine_backward_input(Dims d, std::span<const double> dy, std::span<const double> w, std::span<double> dx) {
  const auto rows = static_cast<std::int64_t>(d.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    double* dxr = dx.data() + r * d.in;
    for (std::size_t i = 0; i < d.in; ++i) dxr[i] = 0.0;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double g = dy[r * d.out + o];
      const double* wo = w.data() + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) dxr[i] += g * wo[i];
    }
  }
}

void affine_backward_params(Dims d, std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                            std::span<double> db) {
  const auto outs = static_cast<std::int64_t>(d.out);
#pragma omp parallel for schedule(static)
  for (std::int64_t o = 0; o < outs; ++o) {
    double* dwo = dw.data() + o * d.in;
    double bacc = db[o];
    for (std::size_t r = 0; r < d.rows; ++r) {
      const double g = dy[r * d.out + o];
      const double* xr = x.data() + r * d.in;
      for (std::size_t i = 0; i < d.in; ++i) dwo[i] += g * xr[i];
      bacc += g;
    }
    db[o] = bacc;
  }
}

}  // namespace omp

namespace {
bool big(Dims d) { return d.rows * d.in * d.out >= kParallelWorkThreshold; }
}  // namespace

void affine_forward(Dims d, std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> out) {
  big(d) ? omp::affine_forward(d, x, w, b, out) : serial::affine_forward(d, x, w, b, out);
}

void affine_backward_input(Dims d, std::span<const double> dy, std::span<const double> w, std::span<double> dx) {
  big(d) ? omp::affine_backward_input(d, dy, w, dx) : serial::affine_backward_input(d, dy, w, dx);
}

void affine_backward_params(Dims d, std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                            std::span<double> db) {
  big(d) ? omp::affine_backward_params(d, dy, x, dw, db) : serial::affine_backward_params(d, dy, x, dw, db);
}

}  // namespace sfc::nn::kernels

#include <algorithm>
#include <cmath>

#include "salisa/kernels.hpp"

namespace salisa::kernels {

namespace {

struct Tap {
  int i0;
  int i1;
  double t;
};

inline Tap tap(double norm, int len) {
  double p = std::clamp((norm + 1.0) * (len - 1) / 2.0, 0.0, static_cast<double>(len - 1));
  // Rounding noise around a pixel center reads that pixel directly.
  if (const double r = std::round(p); std::abs(p - r) < 1e-9) p = r;
  const int i0 = std::min(static_cast<int>(p), len - 1);
  const int i1 = std::min(i0 + 1, len - 1);
  return {i0, i1, p - i0};
}

void warp_row(std::span<const float> src, Extent e, int channels, const SamplingGrid& grid, int row,
              std::span<float> out) {
  const int w = grid.width();
  for (int j = 0; j < w; ++j) {
    const NormCoord c = grid.at(row, j);
    const Tap tx = tap(c.x, e.width);
    const Tap ty = tap(c.y, e.height);
    const std::size_t r0 = static_cast<std::size_t>(ty.i0) * e.width;
    const std::size_t r1 = static_cast<std::size_t>(ty.i1) * e.width;
    const std::size_t a = (r0 + tx.i0) * channels;
    const std::size_t b = (r0 + tx.i1) * channels;
    const std::size_t cc = (r1 + tx.i0) * channels;
    const std::size_t d = (r1 + tx.i1) * channels;
    float* dst = out.data() + (static_cast<std::size_t>(row) * w + j) * channels;
    for (int ch = 0; ch < channels; ++ch) {
      const double top = src[a + ch] * (1.0 - tx.t) + src[b + ch] * tx.t;
      const double bottom = src[cc + ch] * (1.0 - tx.t) + src[d + ch] * tx.t;
      dst[ch] = static_cast<float>(top * (1.0 - ty.t) + bottom * ty.t);
    }
  }
}

}  // namespace

void warp_bilinear_serial(std::span<const float> src, Extent src_extent, int channels, const SamplingGrid& grid,
                          std::span<float> out) {
  for (int i = 0; i < grid.height(); ++i) warp_row(src, src_extent, channels, grid, i, out);
}

void warp_bilinear_omp(std::span<const float> src, Extent src_extent, int channels, const SamplingGrid& grid,
                       std::span<float> out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < grid.height(); ++i) warp_row(src, src_extent, channels, grid, i, out);
}

}  // namespace salisa::kernels

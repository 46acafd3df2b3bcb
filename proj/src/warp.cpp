#include "salisa/warp.hpp"

#include <algorithm>
#include <vector>

#include "salisa/kernels.hpp"

namespace salisa {

ImageBuffer warp_image(const ImageBuffer& src, const SamplingGrid& grid) {
  std::vector<float> out(static_cast<std::size_t>(grid.height()) * grid.width() * src.channels());
  kernels::warp_bilinear_omp(src.pixels(), src.extent(), src.channels(), grid, out);
  return ImageBuffer(grid.height(), grid.width(), src.channels(), std::move(out));
}

SaliencyMap warp_saliency(const SaliencyMap& src, const SamplingGrid& grid) {
  std::vector<float> out(static_cast<std::size_t>(grid.height()) * grid.width());
  kernels::warp_bilinear_omp(src.values(), src.extent(), 1, grid, out);
  for (float& v : out) v = std::clamp(v, 0.0f, 1.0f);
  return SaliencyMap(grid.height(), grid.width(), std::move(out));
}

}  // namespace salisa

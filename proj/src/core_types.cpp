#include "salisa/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "salisa/errors.hpp"

namespace salisa {

namespace {

void require_dims(int height, int width, int minimum, const char* what) {
  if (height < minimum || width < minimum) {
    throw DimensionError(std::string(what) + " needs dimensions >= " + std::to_string(minimum) + ", got " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
}

}  // namespace

NormCoord pixel_to_norm(PixelCoord p, int height, int width) {
  return {-1.0 + 2.0 * p.x / (width - 1), -1.0 + 2.0 * p.y / (height - 1)};
}

PixelCoord norm_to_pixel(NormCoord q, int height, int width) {
  return {(q.x + 1.0) * (width - 1) / 2.0, (q.y + 1.0) * (height - 1) / 2.0};
}

SaliencyMap::SaliencyMap(int height, int width, float fill)
    : SaliencyMap(height, width, std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                                        static_cast<std::size_t>(std::max(width, 0)),
                                                    fill)) {}

SaliencyMap::SaliencyMap(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  require_dims(height, width, 1, "SaliencyMap");
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("SaliencyMap value count does not match " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
  for (float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("saliency value outside [0,1]");
  }
}

SamplingGrid::SamplingGrid(int height, int width, std::vector<NormCoord> coords, bool clamped)
    : height_(height), width_(width), coords_(std::move(coords)), clamped_(clamped) {
  require_dims(height, width, 1, "SamplingGrid");
  if (coords_.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("SamplingGrid coordinate count does not match " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
  for (const auto& c : coords_) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw InvalidInput("non-finite grid coordinate");
  }
}

SamplingGrid identity_grid(int height, int width) {
  require_dims(height, width, 2, "identity_grid");
  std::vector<NormCoord> coords(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    const double y = -1.0 + 2.0 * i / (height - 1);
    for (int j = 0; j < width; ++j) {
      coords[static_cast<std::size_t>(i) * width + j] = {-1.0 + 2.0 * j / (width - 1), y};
    }
  }
  return SamplingGrid(height, width, std::move(coords));
}

std::uint64_t grid_fingerprint(const SamplingGrid& grid) {
  // FNV-1a over dims, flag and the raw coordinate bytes.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const int dims[2] = {grid.height(), grid.width()};
  mix(dims, sizeof(dims));
  const unsigned char flag = grid.clamped() ? 1 : 0;
  mix(&flag, 1);
  mix(grid.coords().data(), grid.coords().size_bytes());
  return h;
}

bool is_valid(const Detection& d) {
  const auto& b = d.box;
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) && std::isfinite(b.x_max) && std::isfinite(b.y_max) &&
         b.x_min < b.x_max && b.y_min < b.y_max && d.score >= 0.0 && d.score <= 1.0;
}

void validate(const Detection& d) {
  if (!is_valid(d)) {
    throw InvalidBox("box (" + std::to_string(d.box.x_min) + ", " + std::to_string(d.box.y_min) + ", " +
                     std::to_string(d.box.x_max) + ", " + std::to_string(d.box.y_max) + ") score " +
                     std::to_string(d.score));
  }
}

ImageBuffer::ImageBuffer(int height, int width, int channels, float fill)
    : ImageBuffer(height, width, channels,
                  std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0) *
                                         std::max(channels, 0),
                                     fill)) {}

ImageBuffer::ImageBuffer(int height, int width, int channels, std::vector<float> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
  require_dims(height, width, 1, "ImageBuffer");
  if (channels != 1 && channels != 3) throw DimensionError("ImageBuffer channels must be 1 or 3");
  if (pixels_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw DimensionError("ImageBuffer pixel count does not match its dimensions");
  }
  for (float v : pixels_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("image value outside [0,1] or non-finite");
  }
}

}  // namespace salisa

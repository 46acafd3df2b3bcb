#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salisa/core_types.hpp"

namespace salisa::io {

/// 16-bit PGM maxval. Even, so a 0.5 label encodes as exactly half of it.
inline constexpr int kSaliencyPgmMax = 65534;

/// Float raster: "SMAP" | u16 version | u32 height | u32 width | f32 values,
/// little-endian, row-major.
inline constexpr std::uint16_t kSaliencyRasterVersion = 1;

std::vector<unsigned char> encode_saliency_pgm(const SaliencyMap& map);
std::vector<unsigned char> encode_saliency_raster(const SaliencyMap& map);
SaliencyMap decode_saliency(std::span<const unsigned char> bytes);

/// .pgm -> 16-bit PGM; anything else -> float raster.
void write_saliency(const std::filesystem::path& path, const SaliencyMap& map);
/// Accepts either encoding (detected from the content).
SaliencyMap read_saliency(const std::filesystem::path& path);

}  // namespace salisa::io

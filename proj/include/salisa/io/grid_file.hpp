#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salisa/core_types.hpp"

namespace salisa::io {

/// Binary grid layout, all little-endian:
///   "SGRD" | u16 version | u32 height | u32 width | u8 flags (bit0 = clamped)
///   | height*width (f32 x, f32 y) row-major.
/// Coordinates are stored as f32, so a grid read back is the f32-rounded grid.
inline constexpr std::uint16_t kGridFileVersion = 1;
inline constexpr std::size_t kGridHeaderBytes = 15;

std::vector<unsigned char> encode_grid(const SamplingGrid& grid);
SamplingGrid decode_grid(std::span<const unsigned char> bytes);

void write_grid(const std::filesystem::path& path, const SamplingGrid& grid);
SamplingGrid read_grid(const std::filesystem::path& path);

}  // namespace salisa::io

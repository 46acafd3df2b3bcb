#pragma once

#include <filesystem>

#include "salisa/core_types.hpp"

namespace salisa::io {

/// Reads 8-bit PNG, binary PPM (P6) or PGM (P5, 8- or 16-bit). Alpha is
/// dropped; values are scaled into [0,1].
ImageBuffer read_image(const std::filesystem::path& path);

/// Writes by extension: .png, .ppm or .pgm (8-bit). Values are rounded from
/// [0,1] to 0..255; PPM needs 3 channels and PGM 1.
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

/// Quantizes and rescales to the exact value an 8-bit round trip yields.
ImageBuffer quantize_8bit(const ImageBuffer& image);

}  // namespace salisa::io

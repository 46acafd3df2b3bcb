#include "salisa/io/grid_file.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "salisa/errors.hpp"
#include "salisa/io/atomic_write.hpp"

namespace salisa::io {

namespace {

static_assert(std::endian::native == std::endian::little, "grid I/O assumes a little-endian host");

template <typename T>
void put(std::vector<unsigned char>& out, T v) {
  const std::size_t at = out.size();
  out.resize(at + sizeof(T));
  std::memcpy(out.data() + at, &v, sizeof(T));
}

template <typename T>
T get(std::span<const unsigned char> bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace

std::vector<unsigned char> encode_grid(const SamplingGrid& grid) {
  std::vector<unsigned char> out;
  out.reserve(kGridHeaderBytes + 8 * grid.coords().size());
  for (const char c : {'S', 'G', 'R', 'D'}) out.push_back(static_cast<unsigned char>(c));
  put<std::uint16_t>(out, kGridFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.height()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.width()));
  put<std::uint8_t>(out, grid.clamped() ? 1 : 0);
  for (const auto& c : grid.coords()) {
    put<float>(out, static_cast<float>(c.x));
    put<float>(out, static_cast<float>(c.y));
  }
  return out;
}

SamplingGrid decode_grid(std::span<const unsigned char> bytes) {
  if (bytes.size() < kGridHeaderBytes || std::memcmp(bytes.data(), "SGRD", 4) != 0) {
    throw FormatError("not a grid file (bad magic)");
  }
  const auto version = get<std::uint16_t>(bytes, 4);
  if (version != kGridFileVersion) throw FormatError("unsupported grid file version " + std::to_string(version));
  const auto height = get<std::uint32_t>(bytes, 6);
  const auto width = get<std::uint32_t>(bytes, 10);
  const auto flags = get<std::uint8_t>(bytes, 14);
  const std::uint64_t cells = std::uint64_t{height} * width;
  if (height == 0 || width == 0 || height > (1u << 20) || width > (1u << 20) ||
      bytes.size() != kGridHeaderBytes + 8 * cells) {
    throw FormatError("grid file length does not match its header");
  }
  std::vector<NormCoord> coords(cells);
  for (std::uint64_t k = 0; k < cells; ++k) {
    const std::size_t off = kGridHeaderBytes + 8 * k;
    coords[k] = {get<float>(bytes, off), get<float>(bytes, off + 4)};
  }
  try {
    return SamplingGrid(static_cast<int>(height), static_cast<int>(width), std::move(coords), (flags & 1) != 0);
  } catch (const InvalidInput& e) {
    throw FormatError(e.what());
  }
}

void write_grid(const std::filesystem::path& path, const SamplingGrid& grid) {
  write_file_atomic(path, encode_grid(grid));
}

SamplingGrid read_grid(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return decode_grid(std::span(reinterpret_cast<const unsigned char*>(data.data()), data.size()));
}

}  // namespace salisa::io

#include "salisa/io/saliency_io.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstring>
#include <string>

#include "salisa/errors.hpp"
#include "salisa/io/atomic_write.hpp"

namespace salisa::io {

std::vector<unsigned char> encode_saliency_pgm(const SaliencyMap& map) {
  const std::string header = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n" +
                             std::to_string(kSaliencyPgmMax) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + 2 * map.values().size());
  for (float v : map.values()) {
    const auto q = static_cast<unsigned>(std::lround(static_cast<double>(v) * kSaliencyPgmMax));
    out.push_back(static_cast<unsigned char>(q >> 8));
    out.push_back(static_cast<unsigned char>(q & 0xff));
  }
  return out;
}

std::vector<unsigned char> encode_saliency_raster(const SaliencyMap& map) {
  std::vector<unsigned char> out{'S', 'M', 'A', 'P'};
  auto put = [&out](const void* p, std::size_t n) {
    const std::size_t at = out.size();
    out.resize(at + n);
    if (n > 0) std::memcpy(out.data() + at, p, n);
  };
  const std::uint16_t version = kSaliencyRasterVersion;
  const auto h = static_cast<std::uint32_t>(map.height());
  const auto w = static_cast<std::uint32_t>(map.width());
  put(&version, 2);
  put(&h, 4);
  put(&w, 4);
  put(map.values().data(), map.values().size_bytes());
  return out;
}

namespace {

SaliencyMap decode_pgm(std::span<const unsigned char> bytes) {
  std::size_t pos = 2;
  auto number = [&]() {
    while (pos < bytes.size() && (std::isspace(bytes[pos]) || bytes[pos] == '#')) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        ++pos;
      }
    }
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && v < (1L << 24)) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
    }
    if (!any) throw FormatError("malformed saliency PGM header");
    return static_cast<int>(v);
  };
  const int w = number();
  const int h = number();
  const int maxval = number();
  ++pos;
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw FormatError("bad saliency PGM header");
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (bytes.size() != pos + count * bps) throw FormatError("saliency PGM length does not match its header");
  std::vector<float> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    unsigned v = bytes[pos + k * bps];
    if (bps == 2) v = (v << 8) | bytes[pos + k * bps + 1];
    values[k] = static_cast<float>(std::min(1.0, static_cast<double>(v) / maxval));
  }
  return SaliencyMap(h, w, std::move(values));
}

SaliencyMap decode_raster(std::span<const unsigned char> bytes) {
  if (bytes.size() < 14) throw FormatError("truncated saliency raster");
  std::uint16_t version;
  std::uint32_t h, w;
  std::memcpy(&version, bytes.data() + 4, 2);
  std::memcpy(&h, bytes.data() + 6, 4);
  std::memcpy(&w, bytes.data() + 10, 4);
  if (version != kSaliencyRasterVersion) throw FormatError("unsupported saliency raster version");
  const std::uint64_t count = std::uint64_t{h} * w;
  if (h == 0 || w == 0 || h > (1u << 20) || w > (1u << 20) || bytes.size() != 14 + 4 * count) {
    throw FormatError("saliency raster length does not match its header");
  }
  std::vector<float> values(count);
  std::memcpy(values.data(), bytes.data() + 14, 4 * count);
  try {
    return SaliencyMap(static_cast<int>(h), static_cast<int>(w), std::move(values));
  } catch (const InvalidInput& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

SaliencyMap decode_saliency(std::span<const unsigned char> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "SMAP", 4) == 0) return decode_raster(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw FormatError("not a saliency file (expected SMAP raster or P5 PGM)");
}

void write_saliency(const std::filesystem::path& path, const SaliencyMap& map) {
  const bool pgm = path.extension() == ".pgm";
  write_file_atomic(path, pgm ? encode_saliency_pgm(map) : encode_saliency_raster(map));
}

SaliencyMap read_saliency(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return decode_saliency(std::span(reinterpret_cast<const unsigned char*>(data.data()), data.size()));
}

}  // namespace salisa::io

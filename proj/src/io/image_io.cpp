#include "salisa/io/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <png.h>

#include "salisa/errors.hpp"
#include "salisa/io/atomic_write.hpp"

namespace salisa::io {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

unsigned char to_byte(float v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

ImageBuffer decode_png(const std::string& data) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    throw FormatError(std::string("PNG: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError(std::string("PNG: ") + image.message);
  }
  std::vector<float> pixels(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) pixels[k] = raw[k] / 255.0f;
  return ImageBuffer(static_cast<int>(image.height), static_cast<int>(image.width), channels, std::move(pixels));
}

std::vector<unsigned char> encode_png(const ImageBuffer& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> raw(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), raw.begin(), to_byte);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG: ") + image.message);
  }
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG: ") + image.message);
  }
  out.resize(size);
  return out;
}

// Skips whitespace and '#' comments, then reads an unsigned decimal.
int pnm_number(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= data.size() || !std::isdigit(static_cast<unsigned char>(data[pos]))) {
    throw FormatError("malformed PNM header");
  }
  long v = 0;
  while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
    v = v * 10 + (data[pos++] - '0');
    if (v > (1L << 24)) throw FormatError("PNM header value too large");
  }
  return static_cast<int>(v);
}

ImageBuffer decode_pnm(const std::string& data) {
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6')) {
    throw FormatError("unsupported PNM variant (need P5 or P6)");
  }
  const int channels = data[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const int width = pnm_number(data, pos);
  const int height = pnm_number(data, pos);
  const int maxval = pnm_number(data, pos);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw FormatError("bad PNM dimensions");
  ++pos;  // single whitespace before the raster
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (data.size() < pos + count * bps) throw FormatError("truncated PNM raster");
  std::vector<float> pixels(count);
  for (std::size_t k = 0; k < count; ++k) {
    unsigned v = static_cast<unsigned char>(data[pos + k * bps]);
    if (bps == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + k * bps + 1]);
    pixels[k] = std::min(1.0f, static_cast<float>(v) / static_cast<float>(maxval));
  }
  return ImageBuffer(height, width, channels, std::move(pixels));
}

std::string encode_pnm(const ImageBuffer& img, int channels) {
  if (img.channels() != channels) {
    throw FormatError(channels == 3 ? "PPM output needs a 3-channel image" : "PGM output needs a 1-channel image");
  }
  std::string out = (channels == 3 ? "P6\n" : "P5\n") + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.begin() + static_cast<std::ptrdiff_t>(header),
                 [](float v) { return static_cast<char>(to_byte(v)); });
  return out;
}

}  // namespace

ImageBuffer read_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() >= 8 && std::memcmp(data.data(), "\x89PNG", 4) == 0) return decode_png(data);
  if (data.size() >= 2 && data[0] == 'P') return decode_pnm(data);
  throw FormatError("unrecognized image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_file_atomic(path, encode_png(image));
  } else if (ext == ".ppm") {
    write_file_atomic(path, encode_pnm(image, 3));
  } else if (ext == ".pgm") {
    write_file_atomic(path, encode_pnm(image, 1));
  } else {
    throw FormatError("unsupported image extension '" + ext + "' (use .png, .ppm or .pgm)");
  }
}

ImageBuffer quantize_8bit(const ImageBuffer& image) {
  std::vector<float> pixels(image.pixels().size());
  std::transform(image.pixels().begin(), image.pixels().end(), pixels.begin(),
                 [](float v) { return to_byte(v) / 255.0f; });
  return ImageBuffer(image.height(), image.width(), image.channels(), std::move(pixels));
}

}  // namespace salisa::io

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "viewloom/error.hpp"

namespace viewloom {

// 8-bit interleaved raster, row-major. channels is 1 (gray), 3 (RGB) or
// 4 (RGBA).
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int h, int w, int c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h <= 0 || w <= 0 || c <= 0)
      throw ValidationError("Image: non-positive dimensions");
  }

  std::uint8_t& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.height == b.height && a.width == b.width &&
           a.channels == b.channels && a.data == b.data;
  }
};

// Per-frame binary mask; bits hold strictly 0 or 1.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, fill) {
    if (h <= 0 || w <= 0)
      throw ValidationError("BinaryMask: non-positive dimensions");
    if (fill > 1) throw ValidationError("BinaryMask: fill must be 0 or 1");
  }

  std::uint8_t& at(int y, int x) {
    return bits[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return bits[static_cast<std::size_t>(y) * width + x];
  }

  std::size_t count_set() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  bool all_of(std::uint8_t v) const {
    for (auto b : bits)
      if (b != v) return false;
    return true;
  }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.height == b.height && a.width == b.width && a.bits == b.bits;
  }
};

inline void validate_mask(const BinaryMask& m) {
  if (m.height <= 0 || m.width <= 0)
    throw ValidationError("mask has non-positive dimensions");
  if (m.bits.size() != static_cast<std::size_t>(m.height) * m.width)
    throw ValidationError("mask bit buffer does not match dimensions");
  for (auto b : m.bits)
    if (b > 1) throw ValidationError("mask values must be strictly 0 or 1");
}

inline std::uint8_t clamp_to_u8(double v) {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);  // round half up
}

// Rec.601 luma from an RGB pixel, unquantized.
inline double luma601(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

inline Image convert_to_rgb(const Image& src) {
  if (src.channels == 3) return src;
  if (src.channels == 1) {
    Image out(src.height, src.width, 3);
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x) {
        const std::uint8_t v = src.at(y, x, 0);
        out.at(y, x, 0) = v;
        out.at(y, x, 1) = v;
        out.at(y, x, 2) = v;
      }
    return out;
  }
  if (src.channels == 4) {  // drop alpha
    Image out(src.height, src.width, 3);
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        for (int c = 0; c < 3; ++c) out.at(y, x, c) = src.at(y, x, c);
    return out;
  }
  throw ValidationError("convert_to_rgb: expected 1, 3 or 4 channels, got " +
                        std::to_string(src.channels));
}

}  // namespace viewloom

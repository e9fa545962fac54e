#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgeseg/error.hpp"

namespace edgeseg {

inline constexpr int kNumClasses = 19;
inline constexpr std::uint8_t kIgnoreLabel = 255;

inline bool is_valid_class(std::uint8_t v) { return v < kNumClasses; }
inline bool is_valid_label_value(std::uint8_t v) {
  return is_valid_class(v) || v == kIgnoreLabel;
}

// Per-pixel class IDs (0..18, 255 = ignore), row-major.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  LabelMap() = default;
  LabelMap(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  std::uint8_t at(int x, int y) const {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

// Throws invalid_class_id / dimension_mismatch when the map breaks its invariants.
void validate(const LabelMap& map);

// Row-major interleaved 8-bit RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  const std::uint8_t* at(int x, int y) const {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  std::uint8_t* at(int x, int y) {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// C x H x W dense float array, channel-major row-major. The data interchange
// type of the differentiable head; all arithmetic on it is 32-bit with 64-bit
// accumulation for reductions.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0.0f) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }

  std::size_t index(int c, int y, int x) const {
    assert(c >= 0 && c < channels && y >= 0 && y < height && x >= 0 && x < width);
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  float at(int c, int y, int x) const { return data[index(c, y, x)]; }
  float& at(int c, int y, int x) { return data[index(c, y, x)]; }

  bool same_shape(const Tensor3& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }
};

bool all_finite(const Tensor3& t);

// Per-pixel {0,1} edge indicator plus a validity mask; invalid pixels carry no
// edge claim (edges forced to 0 wherever valid is 0).
struct BinaryEdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> edges;
  std::vector<std::uint8_t> valid;

  BinaryEdgeMap() = default;
  BinaryEdgeMap(int w, int h)
      : width(w), height(h),
        edges(static_cast<std::size_t>(w) * h, 0),
        valid(static_cast<std::size_t>(w) * h, 1) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

}  // namespace edgeseg

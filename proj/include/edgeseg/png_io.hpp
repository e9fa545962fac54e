#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "edgeseg/types.hpp"

namespace edgeseg {

// Raw 8-bit grayscale buffer, no class-ID semantics. Used for edge-map
// visualizations (0 non-edge / 255 edge / 128 invalid) and as the transport
// under LabelMap I/O.
struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
};

Gray8 load_gray8(const std::filesystem::path& path);
void save_gray8(const Gray8& img, const std::filesystem::path& path);

// Strict loaders: they reject, never repair. Label maps must be 8-bit
// single-channel PNGs with values in {0..18, 255}; images must be 8-bit RGB.
LabelMap load_label_map(const std::filesystem::path& path);
void save_label_map(const LabelMap& map, const std::filesystem::path& path);

RgbImage load_rgb_image(const std::filesystem::path& path);
void save_rgb_image(const RgbImage& image, const std::filesystem::path& path);

}  // namespace edgeseg

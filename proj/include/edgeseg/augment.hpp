#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeseg/rng.hpp"
#include "edgeseg/types.hpp"

namespace edgeseg {

struct AugmentConfig {
  std::vector<std::uint8_t> rare_classes = {3, 4, 15, 16};  // wall, fence, bus, train
  double scale_min = 0.5;
  double scale_max = 1.5;
  double flip_probability = 0.5;
  int pastes_per_image = 2;
  int min_instance_pixels = 64;
  std::uint64_t seed = 0;
};

void validate(const AugmentConfig& config);
AugmentConfig augment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AugmentConfig& config);

// One 8-connected component of a rare class, cut out with its tight bbox.
// pixels covers the whole bbox; only mask=1 entries are meaningful.
struct InstancePatch {
  std::uint8_t source_class = 0;
  int x = 0, y = 0;  // bbox origin in the source image
  int width = 0, height = 0;
  std::vector<std::uint8_t> mask;    // width*height, {0,1}
  std::vector<std::uint8_t> pixels;  // width*height*3 RGB

  std::size_t mask_area() const;
};

struct ClassHistogram {
  std::array<std::uint64_t, kNumClasses> counts{};
  std::uint64_t ignore_count = 0;

  std::uint64_t labeled_total() const;
  std::uint64_t total() const { return labeled_total() + ignore_count; }
  // counts[c] / labeled_total, 0 when nothing labeled.
  std::array<double, kNumClasses> frequencies() const;
};

ClassHistogram class_histogram(std::span<const LabelMap> labels);
void accumulate(ClassHistogram& hist, const LabelMap& label);

// Patches ordered row-major by each component's first pixel.
std::vector<InstancePatch> extract_instances(const LabelMap& label, const RgbImage& image,
                                             std::uint8_t class_id, int min_pixels);

// Nearest-neighbor mask resize; bilinear pixels, falling back to the nearest
// source pixel whenever a bilinear tap lies outside the mask. flip mirrors
// about the vertical axis.
InstancePatch transform_patch(const InstancePatch& patch, double scale, bool flip);

// Pure: returns a new pair, inputs untouched. mask=1 pixels overwrite both
// image and label (label takes source_class).
std::pair<RgbImage, LabelMap> paste_patch(const RgbImage& image, const LabelMap& label,
                                          const InstancePatch& patch, int x, int y);

struct PasteRecord {
  int donor = -1;
  double scale = 1.0;
  bool flip = false;
  int x = -1, y = -1;      // placement of the transformed bbox; -1 when skipped
  int width = 0, height = 0;  // transformed size
  bool skipped = false;
  std::string reason;  // set when skipped
};

struct AugmentLog {
  std::vector<PasteRecord> pastes;
  bool empty_donor_pool = false;
};

nlohmann::json to_json(const PasteRecord& record);

struct AugmentResult {
  RgbImage image;
  LabelMap label;
  AugmentLog log;
};

// Up to pastes_per_image draws: uniform donor, scale ~ U[scale_min,scale_max],
// flip with flip_probability, uniform in-bounds position. Draws that cannot
// fit are logged and skipped. An empty donor pool degrades to a no-op with
// log.empty_donor_pool set. Deterministic given the rng state.
AugmentResult augment_sample(const RgbImage& image, const LabelMap& label,
                             std::span<const InstancePatch> donor_pool,
                             const AugmentConfig& config, Pcg32& rng);

}  // namespace edgeseg

#include "edgeseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edgeseg {

void validate(const AugmentConfig& config) {
  if (!(config.scale_min > 0.0) || config.scale_min > config.scale_max)
    fail(Errc::invalid_config, "need 0 < scale_min <= scale_max");
  if (config.flip_probability < 0.0 || config.flip_probability > 1.0)
    fail(Errc::invalid_config, "flip_probability must be in [0,1]");
  if (config.pastes_per_image < 0) fail(Errc::invalid_config, "pastes_per_image must be >= 0");
  if (config.min_instance_pixels < 1)
    fail(Errc::invalid_config, "min_instance_pixels must be >= 1");
  for (std::uint8_t c : config.rare_classes)
    if (!is_valid_class(c))
      fail(Errc::invalid_config, "rare class id out of range: " + std::to_string(c));
}

AugmentConfig augment_config_from_json(const nlohmann::json& j) {
  AugmentConfig config;
  if (j.contains("rare_classes"))
    config.rare_classes = j.at("rare_classes").get<std::vector<std::uint8_t>>();
  config.scale_min = j.value("scale_min", config.scale_min);
  config.scale_max = j.value("scale_max", config.scale_max);
  config.flip_probability = j.value("flip_probability", config.flip_probability);
  config.pastes_per_image = j.value("pastes_per_image", config.pastes_per_image);
  config.min_instance_pixels = j.value("min_instance_pixels", config.min_instance_pixels);
  config.seed = j.value("seed", config.seed);
  validate(config);
  return config;
}

nlohmann::json to_json(const AugmentConfig& config) {
  return nlohmann::json{
      {"rare_classes", config.rare_classes},
      {"scale_min", config.scale_min},
      {"scale_max", config.scale_max},
      {"flip_probability", config.flip_probability},
      {"pastes_per_image", config.pastes_per_image},
      {"min_instance_pixels", config.min_instance_pixels},
      {"seed", config.seed},
  };
}

std::size_t InstancePatch::mask_area() const {
  std::size_t n = 0;
  for (std::uint8_t m : mask) n += m;
  return n;
}

void accumulate(ClassHistogram& hist, const LabelMap& label) {
  validate(label);
  for (std::uint8_t v : label.data) {
    if (v == kIgnoreLabel)
      ++hist.ignore_count;
    else
      ++hist.counts[v];
  }
}

ClassHistogram class_histogram(std::span<const LabelMap> labels) {
  ClassHistogram hist;
  for (const LabelMap& label : labels) accumulate(hist, label);
  return hist;
}

std::uint64_t ClassHistogram::labeled_total() const {
  std::uint64_t sum = 0;
  for (std::uint64_t c : counts) sum += c;
  return sum;
}

std::array<double, kNumClasses> ClassHistogram::frequencies() const {
  std::array<double, kNumClasses> freq{};
  std::uint64_t total = labeled_total();
  if (total == 0) return freq;
  for (int c = 0; c < kNumClasses; ++c)
    freq[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
  return freq;
}

std::vector<InstancePatch> extract_instances(const LabelMap& label, const RgbImage& image,
                                             std::uint8_t class_id, int min_pixels) {
  if (label.width != image.width || label.height != image.height)
    fail(Errc::dimension_mismatch, "label and image dimensions differ");
  validate(label);

  const int w = label.width;
  const int h = label.height;
  std::vector<std::uint8_t> visited(label.pixel_count(), 0);
  std::vector<InstancePatch> patches;
  std::vector<std::size_t> stack;
  std::vector<std::size_t> component;

  // Row-major scan keeps patch order deterministic: components appear in the
  // order of their first (top-left) pixel.
  for (std::size_t start = 0; start < label.data.size(); ++start) {
    if (visited[start] || label.data[start] != class_id) continue;

    component.clear();
    stack.assign(1, start);
    visited[start] = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      component.push_back(i);
      int cx = static_cast<int>(i % w);
      int cy = static_cast<int>(i / w);
      for (int ny = std::max(0, cy - 1); ny <= std::min(h - 1, cy + 1); ++ny) {
        for (int nx = std::max(0, cx - 1); nx <= std::min(w - 1, cx + 1); ++nx) {
          std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
          if (!visited[ni] && label.data[ni] == class_id) {
            visited[ni] = 1;
            stack.push_back(ni);
          }
        }
      }
    }
    if (component.size() < static_cast<std::size_t>(min_pixels)) continue;

    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    for (std::size_t i : component) {
      int cx = static_cast<int>(i % w);
      int cy = static_cast<int>(i / w);
      min_x = std::min(min_x, cx);
      min_y = std::min(min_y, cy);
      max_x = std::max(max_x, cx);
      max_y = std::max(max_y, cy);
    }

    InstancePatch patch;
    patch.source_class = class_id;
    patch.x = min_x;
    patch.y = min_y;
    patch.width = max_x - min_x + 1;
    patch.height = max_y - min_y + 1;
    patch.mask.assign(static_cast<std::size_t>(patch.width) * patch.height, 0);
    patch.pixels.resize(static_cast<std::size_t>(patch.width) * patch.height * 3);
    for (int py = 0; py < patch.height; ++py)
      std::copy_n(image.at(min_x, min_y + py), static_cast<std::size_t>(patch.width) * 3,
                  patch.pixels.data() + static_cast<std::size_t>(py) * patch.width * 3);
    for (std::size_t i : component) {
      int cx = static_cast<int>(i % w) - min_x;
      int cy = static_cast<int>(i / w) - min_y;
      patch.mask[static_cast<std::size_t>(cy) * patch.width + cx] = 1;
    }
    patches.push_back(std::move(patch));
  }
  return patches;
}

namespace {

// Nearest source index for destination pixel d under a dst/src size change,
// pixel-center convention.
inline int nearest_index(int d, int src_size, int dst_size) {
  int s = static_cast<int>((d + 0.5) * static_cast<double>(src_size) / dst_size);
  return std::clamp(s, 0, src_size - 1);
}

}  // namespace

InstancePatch transform_patch(const InstancePatch& patch, double scale, bool flip) {
  int new_w = static_cast<int>(std::lround(patch.width * scale));
  int new_h = static_cast<int>(std::lround(patch.height * scale));
  if (new_w < 1 || new_h < 1)
    fail(Errc::degenerate_size, "patch resized to " + std::to_string(new_w) + "x" +
                                    std::to_string(new_h));

  InstancePatch out;
  out.source_class = patch.source_class;
  out.x = patch.x;
  out.y = patch.y;
  out.width = new_w;
  out.height = new_h;
  out.mask.assign(static_cast<std::size_t>(new_w) * new_h, 0);
  out.pixels.assign(static_cast<std::size_t>(new_w) * new_h * 3, 0);

  auto src_mask = [&](int x, int y) {
    return patch.mask[static_cast<std::size_t>(y) * patch.width + x];
  };
  auto src_px = [&](int x, int y) {
    return patch.pixels.data() + (static_cast<std::size_t>(y) * patch.width + x) * 3;
  };

  for (int dy = 0; dy < new_h; ++dy) {
    for (int dx = 0; dx < new_w; ++dx) {
      int nx = nearest_index(dx, patch.width, new_w);
      int ny = nearest_index(dy, patch.height, new_h);
      std::size_t di = static_cast<std::size_t>(dy) * new_w + dx;
      out.mask[di] = src_mask(nx, ny);

      // Bilinear sample; taps outside the mask fall back to the nearest
      // source pixel (which shares the destination's mask value).
      double sx = (dx + 0.5) * static_cast<double>(patch.width) / new_w - 0.5;
      double sy = (dy + 0.5) * static_cast<double>(patch.height) / new_h - 0.5;
      int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, patch.width - 1);
      int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, patch.height - 1);
      int x1 = std::min(x0 + 1, patch.width - 1);
      int y1 = std::min(y0 + 1, patch.height - 1);
      double fx = std::clamp(sx - x0, 0.0, 1.0);
      double fy = std::clamp(sy - y0, 0.0, 1.0);

      bool all_taps_masked = src_mask(x0, y0) && src_mask(x1, y0) && src_mask(x0, y1) &&
                             src_mask(x1, y1);
      std::uint8_t* dst = out.pixels.data() + di * 3;
      if (all_taps_masked) {
        for (int ch = 0; ch < 3; ++ch) {
          double top = src_px(x0, y0)[ch] * (1.0 - fx) + src_px(x1, y0)[ch] * fx;
          double bottom = src_px(x0, y1)[ch] * (1.0 - fx) + src_px(x1, y1)[ch] * fx;
          double v = top * (1.0 - fy) + bottom * fy;
          dst[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
        }
      } else {
        const std::uint8_t* src = src_px(nx, ny);
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
      }
    }
  }

  if (flip) {
    InstancePatch flipped = out;
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        int mx = out.width - 1 - x;
        flipped.mask[static_cast<std::size_t>(y) * out.width + x] =
            out.mask[static_cast<std::size_t>(y) * out.width + mx];
        for (int ch = 0; ch < 3; ++ch)
          flipped.pixels[(static_cast<std::size_t>(y) * out.width + x) * 3 + ch] =
              out.pixels[(static_cast<std::size_t>(y) * out.width + mx) * 3 + ch];
      }
    }
    return flipped;
  }
  return out;
}

std::pair<RgbImage, LabelMap> paste_patch(const RgbImage& image, const LabelMap& label,
                                          const InstancePatch& patch, int x, int y) {
  if (image.width != label.width || image.height != label.height)
    fail(Errc::dimension_mismatch, "image and label dimensions differ");
  if (x < 0 || y < 0 || x + patch.width > image.width || y + patch.height > image.height)
    fail(Errc::out_of_bounds, "patch placement at (" + std::to_string(x) + ", " +
                                  std::to_string(y) + ") exceeds the canvas");

  RgbImage out_image = image;
  LabelMap out_label = label;
  for (int py = 0; py < patch.height; ++py) {
    for (int px = 0; px < patch.width; ++px) {
      if (!patch.mask[static_cast<std::size_t>(py) * patch.width + px]) continue;
      const std::uint8_t* src = patch.pixels.data() +
                                (static_cast<std::size_t>(py) * patch.width + px) * 3;
      std::uint8_t* dst = out_image.at(x + px, y + py);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
      out_label.at(x + px, y + py) = patch.source_class;
    }
  }
  return {std::move(out_image), std::move(out_label)};
}

nlohmann::json to_json(const PasteRecord& record) {
  nlohmann::json j{
      {"donor", record.donor},   {"scale", record.scale},   {"flip", record.flip},
      {"x", record.x},           {"y", record.y},           {"width", record.width},
      {"height", record.height}, {"skipped", record.skipped},
  };
  if (record.skipped) j["reason"] = record.reason;
  return j;
}

AugmentResult augment_sample(const RgbImage& image, const LabelMap& label,
                             std::span<const InstancePatch> donor_pool,
                             const AugmentConfig& config, Pcg32& rng) {
  validate(config);
  if (image.width != label.width || image.height != label.height)
    fail(Errc::dimension_mismatch, "image and label dimensions differ");
  for (const InstancePatch& patch : donor_pool)
    if (std::find(config.rare_classes.begin(), config.rare_classes.end(), patch.source_class) ==
        config.rare_classes.end())
      fail(Errc::invalid_config, "donor pool contains a non-rare class " +
                                     std::to_string(patch.source_class));

  AugmentResult result{image, label, {}};
  if (config.pastes_per_image > 0 && donor_pool.empty()) {
    result.log.empty_donor_pool = true;
    return result;
  }

  for (int i = 0; i < config.pastes_per_image; ++i) {
    PasteRecord record;
    record.donor = static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(donor_pool.size())));
    record.scale = rng.uniform_real(config.scale_min, config.scale_max);
    record.flip = rng.bernoulli(config.flip_probability);

    const InstancePatch& donor = donor_pool[record.donor];
    int new_w = static_cast<int>(std::lround(donor.width * record.scale));
    int new_h = static_cast<int>(std::lround(donor.height * record.scale));
    if (new_w < 1 || new_h < 1) {
      record.skipped = true;
      record.reason = "degenerate size";
      result.log.pastes.push_back(record);
      continue;
    }
    if (new_w > image.width || new_h > image.height) {
      record.skipped = true;
      record.reason = "does not fit";
      record.width = new_w;
      record.height = new_h;
      result.log.pastes.push_back(record);
      continue;
    }

    InstancePatch transformed = transform_patch(donor, record.scale, record.flip);
    record.width = transformed.width;
    record.height = transformed.height;
    record.x = static_cast<int>(rng.uniform_below(
        static_cast<std::uint32_t>(image.width - transformed.width + 1)));
    record.y = static_cast<int>(rng.uniform_below(
        static_cast<std::uint32_t>(image.height - transformed.height + 1)));

    auto [next_image, next_label] =
        paste_patch(result.image, result.label, transformed, record.x, record.y);
    result.image = std::move(next_image);
    result.label = std::move(next_label);
    result.log.pastes.push_back(record);
  }
  return result;
}

}  // namespace edgeseg

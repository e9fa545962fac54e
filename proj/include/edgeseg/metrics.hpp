#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include <json.hpp>

#include "edgeseg/types.hpp"

namespace edgeseg {

// counts[truth][pred], 19x19. The sufficient statistic for every metric here.
struct ConfusionMatrix {
  std::array<std::uint64_t, kNumClasses * kNumClasses> counts{};

  std::uint64_t at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth) * kNumClasses + pred];
  }
  std::uint64_t& at(int truth, int pred) {
    return counts[static_cast<std::size_t>(truth) * kNumClasses + pred];
  }
  std::uint64_t total() const;

  // Element-wise sum; merge order irrelevant.
  void merge(const ConfusionMatrix& other);
};

// Truth ignore pixels are skipped; predictions must not contain ignore.
void accumulate(ConfusionMatrix& cm, const LabelMap& pred, const LabelMap& truth);

// IoU_c = TP / (TP + FP + FN); nullopt when the class appears in neither
// truth nor prediction (never 0, never NaN).
std::array<std::optional<double>, kNumClasses> iou_per_class(const ConfusionMatrix& cm);

// Unweighted mean over defined classes. Throws all_classes_undefined on an
// empty matrix.
double mean_iou(const ConfusionMatrix& cm);

// Mean weighted by each class's truth-pixel share.
double freq_weighted_iou(const ConfusionMatrix& cm);

inline constexpr int kNumCategories = 7;

// Total mapping trainId (0..18) -> category (0..6).
struct CategoryMap {
  std::array<std::uint8_t, kNumClasses> mapping{};
};

CategoryMap cityscapes_category_map();
CategoryMap category_map_from_json(const nlohmann::json& j);

struct CategoryMetrics {
  std::array<std::optional<double>, kNumCategories> iou{};
  double mean_iou = 0.0;
  double freq_weighted_iou = 0.0;
};

// Collapse class rows/cols into categories, then IoU as above. Within-category
// confusions count as category true positives.
CategoryMetrics category_metrics(const ConfusionMatrix& cm, const CategoryMap& cat_map);

// Per-class IoUs, their unweighted and frequency-weighted means, and the same
// at category level: every plausible reading of a four-column summary row.
nlohmann::json report(const ConfusionMatrix& cm, const CategoryMap& cat_map);

}  // namespace edgeseg

#include "edgeseg/metrics.hpp"

#include <string>

#include "edgeseg/cityscapes.hpp"

namespace edgeseg {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (std::uint64_t c : counts) sum += c;
  return sum;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

void accumulate(ConfusionMatrix& cm, const LabelMap& pred, const LabelMap& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    fail(Errc::dimension_mismatch,
         "pred " + std::to_string(pred.width) + "x" + std::to_string(pred.height) + " vs truth " +
             std::to_string(truth.width) + "x" + std::to_string(truth.height));
  validate(pred);
  validate(truth);
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    std::uint8_t t = truth.data[i];
    std::uint8_t p = pred.data[i];
    if (p == kIgnoreLabel) fail(Errc::pred_contains_ignore, "prediction contains ignore pixels");
    if (t == kIgnoreLabel) continue;
    ++cm.at(t, p);
  }
}

namespace {

// IoU per class from any square matrix; nullopt when TP+FP+FN == 0.
template <int N>
std::array<std::optional<double>, N> iou_from_counts(const std::uint64_t* counts) {
  std::array<std::optional<double>, N> out{};
  for (int c = 0; c < N; ++c) {
    std::uint64_t tp = counts[c * N + c];
    std::uint64_t truth_total = 0, pred_total = 0;
    for (int k = 0; k < N; ++k) {
      truth_total += counts[c * N + k];
      pred_total += counts[k * N + c];
    }
    std::uint64_t denom = truth_total + pred_total - tp;  // TP + FP + FN
    if (denom > 0) out[c] = static_cast<double>(tp) / static_cast<double>(denom);
  }
  return out;
}

template <int N>
double unweighted_mean(const std::array<std::optional<double>, N>& ious) {
  double sum = 0.0;
  int defined = 0;
  for (const auto& iou : ious)
    if (iou) {
      sum += *iou;
      ++defined;
    }
  if (defined == 0) fail(Errc::all_classes_undefined, "confusion matrix is empty");
  return sum / defined;
}

template <int N>
double weighted_mean(const std::uint64_t* counts, const std::array<std::optional<double>, N>& ious) {
  std::uint64_t total = 0;
  double sum = 0.0;
  for (int c = 0; c < N; ++c) {
    std::uint64_t truth_total = 0;
    for (int k = 0; k < N; ++k) truth_total += counts[c * N + k];
    if (truth_total == 0) continue;
    total += truth_total;
    sum += static_cast<double>(truth_total) * ious[c].value_or(0.0);
  }
  if (total == 0) fail(Errc::all_classes_undefined, "confusion matrix has no truth pixels");
  return sum / static_cast<double>(total);
}

}  // namespace

std::array<std::optional<double>, kNumClasses> iou_per_class(const ConfusionMatrix& cm) {
  return iou_from_counts<kNumClasses>(cm.counts.data());
}

double mean_iou(const ConfusionMatrix& cm) {
  return unweighted_mean<kNumClasses>(iou_per_class(cm));
}

double freq_weighted_iou(const ConfusionMatrix& cm) {
  return weighted_mean<kNumClasses>(cm.counts.data(), iou_per_class(cm));
}

CategoryMap cityscapes_category_map() {
  CategoryMap map;
  map.mapping = cityscapes::kClassToCategory;
  return map;
}

CategoryMap category_map_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.contains("mapping") ? j.at("mapping") : j;
  if (!arr.is_array() || arr.size() != kNumClasses)
    fail(Errc::invalid_config, "category map must list 19 category ids");
  CategoryMap map;
  for (int c = 0; c < kNumClasses; ++c) {
    int cat = arr[c].get<int>();
    if (cat < 0 || cat >= kNumCategories)
      fail(Errc::invalid_config, "category id out of range: " + std::to_string(cat));
    map.mapping[c] = static_cast<std::uint8_t>(cat);
  }
  return map;
}

CategoryMetrics category_metrics(const ConfusionMatrix& cm, const CategoryMap& cat_map) {
  std::array<std::uint64_t, kNumCategories * kNumCategories> collapsed{};
  for (int t = 0; t < kNumClasses; ++t)
    for (int p = 0; p < kNumClasses; ++p)
      collapsed[static_cast<std::size_t>(cat_map.mapping[t]) * kNumCategories +
                cat_map.mapping[p]] += cm.at(t, p);

  CategoryMetrics out;
  out.iou = iou_from_counts<kNumCategories>(collapsed.data());
  out.mean_iou = unweighted_mean<kNumCategories>(out.iou);
  out.freq_weighted_iou = weighted_mean<kNumCategories>(collapsed.data(), out.iou);
  return out;
}

nlohmann::json report(const ConfusionMatrix& cm, const CategoryMap& cat_map) {
  auto ious = iou_per_class(cm);
  CategoryMetrics cat = category_metrics(cm, cat_map);

  nlohmann::json per_class = nlohmann::json::object();
  for (int c = 0; c < kNumClasses; ++c)
    per_class[cityscapes::kClassNames[c]] =
        ious[c] ? nlohmann::json(*ious[c]) : nlohmann::json(nullptr);

  nlohmann::json per_category = nlohmann::json::object();
  for (int c = 0; c < kNumCategories; ++c)
    per_category[cityscapes::kCategoryNames[c]] =
        cat.iou[c] ? nlohmann::json(*cat.iou[c]) : nlohmann::json(nullptr);

  return nlohmann::json{
      {"per_class_iou", per_class},
      {"miou_cls", mean_iou(cm)},
      {"freq_weighted_iou_cls", freq_weighted_iou(cm)},
      {"per_category_iou", per_category},
      {"miou_cat", cat.mean_iou},
      {"freq_weighted_iou_cat", cat.freq_weighted_iou},
      {"total_pixels", cm.total()},
  };
}

}  // namespace edgeseg

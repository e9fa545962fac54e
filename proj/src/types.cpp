#include "edgeseg/types.hpp"

#include <cmath>
#include <string>

namespace edgeseg {

void validate(const LabelMap& map) {
  if (map.data.size() != map.pixel_count())
    fail(Errc::dimension_mismatch, "label data length does not match width*height");
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    if (!is_valid_label_value(map.data[i])) {
      int x = static_cast<int>(i % map.width);
      int y = static_cast<int>(i / map.width);
      fail(Errc::invalid_class_id, "value " + std::to_string(map.data[i]) + " at (" +
                                       std::to_string(x) + ", " + std::to_string(y) + ")");
    }
  }
}

bool all_finite(const Tensor3& t) {
  for (float v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace edgeseg

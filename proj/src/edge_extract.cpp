#include "edgeseg/edge_extract.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace edgeseg {

GradientMap sobel_magnitude(const LabelMap& label) {
  validate(label);
  const int w = label.width;
  const int h = label.height;
  GradientMap grad{w, h, std::vector<float>(label.pixel_count(), 0.0f)};

  // Replicate padding; class IDs (and the ignore value 255) as integers, so
  // the result is exact.
  auto sample = [&](int x, int y) -> int {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return label.data[static_cast<std::size_t>(y) * w + x];
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int gx = (sample(x + 1, y - 1) + 2 * sample(x + 1, y) + sample(x + 1, y + 1)) -
               (sample(x - 1, y - 1) + 2 * sample(x - 1, y) + sample(x - 1, y + 1));
      int gy = (sample(x - 1, y + 1) + 2 * sample(x, y + 1) + sample(x + 1, y + 1)) -
               (sample(x - 1, y - 1) + 2 * sample(x, y - 1) + sample(x + 1, y - 1));
      grad.magnitude[static_cast<std::size_t>(y) * w + x] =
          static_cast<float>(std::abs(gx) + std::abs(gy));
    }
  }
  return grad;
}

BinaryEdgeMap threshold_edges(const GradientMap& grad) {
  BinaryEdgeMap out(grad.width, grad.height);
  for (std::size_t i = 0; i < grad.magnitude.size(); ++i)
    out.edges[i] = grad.magnitude[i] >= 1.0f ? 1 : 0;
  return out;
}

BinaryEdgeMap edge_target(const LabelMap& label) {
  BinaryEdgeMap out = threshold_edges(sobel_magnitude(label));
  const int w = label.width;
  const int h = label.height;

  // A pixel is invalid when its (clamped) 3x3 Sobel window touches any
  // ignore pixel; such pixels also carry edges = 0.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool touches_ignore = false;
      for (int ny = std::max(0, y - 1); ny <= std::min(h - 1, y + 1) && !touches_ignore; ++ny)
        for (int nx = std::max(0, x - 1); nx <= std::min(w - 1, x + 1); ++nx)
          if (label.data[static_cast<std::size_t>(ny) * w + nx] == kIgnoreLabel) {
            touches_ignore = true;
            break;
          }
      if (touches_ignore) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        out.valid[i] = 0;
        out.edges[i] = 0;
      }
    }
  }
  return out;
}

}  // namespace edgeseg

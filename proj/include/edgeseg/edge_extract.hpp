#pragma once

#include <vector>

#include "edgeseg/types.hpp"

namespace edgeseg {

// Non-negative Sobel response per pixel.
struct GradientMap {
  int width = 0;
  int height = 0;
  std::vector<float> magnitude;
};

// |Gx| + |Gy| with the standard 3x3 Sobel pair, class IDs treated as reals,
// replicate border padding. Ignore pixels participate as the value 255 here;
// edge_target masks them out.
GradientMap sobel_magnitude(const LabelMap& label);

// edges[i] = magnitude[i] >= 1; valid mask all 1 (refined by edge_target).
BinaryEdgeMap threshold_edges(const GradientMap& grad);

// Ground-truth edge target: Sobel -> threshold, then invalidate every pixel
// whose 3x3 window touches an ignore pixel (edges forced to 0 there).
BinaryEdgeMap edge_target(const LabelMap& label);

}  // namespace edgeseg

#pragma once

#include <array>
#include <cstdint>

namespace edgeseg {

// Cityscapes trainId conventions: 19 evaluated classes, 255 = ignore.
namespace cityscapes {

extern const std::array<const char*, 19> kClassNames;

// trainId -> category (0 flat, 1 construction, 2 object, 3 nature, 4 sky,
// 5 human, 6 vehicle).
extern const std::array<std::uint8_t, 19> kClassToCategory;

extern const std::array<const char*, 7> kCategoryNames;

// Official color palette, RGB per trainId.
extern const std::array<std::array<std::uint8_t, 3>, 19> kPalette;

// Classes the augmentation pipeline treats as rare by default:
// wall, fence, bus, train.
extern const std::array<std::uint8_t, 4> kDefaultRareClasses;

}  // namespace cityscapes
}  // namespace edgeseg
